"""OpenTelemetry tracer provider for planner and simulator runs."""

from contextlib import contextmanager
from typing import Any, Dict, Iterator, Optional

from loguru import logger
from opentelemetry import trace
from opentelemetry.sdk.resources import Resource
from opentelemetry.sdk.trace import TracerProvider
from opentelemetry.sdk.trace.export import (
    BatchSpanProcessor,
    ConsoleSpanExporter,
    SimpleSpanProcessor,
)
from opentelemetry.trace import Status, StatusCode

from rac_grid import __version__
from rac_grid.shared.settings import settings

_provider: Optional[TracerProvider] = None


def _setup_tracer_provider() -> TracerProvider:
    """Set up the tracer provider from global settings."""
    resource = Resource.create({
        "service.name": settings.service_name,
        "deployment.environment": settings.environment,
        "service.version": __version__,
    })
    provider = TracerProvider(resource=resource)

    if settings.otlp_endpoint:
        # Imported lazily: the OTLP exporter pulls in protobuf/HTTP machinery.
        from opentelemetry.exporter.otlp.proto.http.trace_exporter import OTLPSpanExporter

        provider.add_span_processor(
            BatchSpanProcessor(OTLPSpanExporter(endpoint=settings.otlp_endpoint, timeout=30))
        )
        logger.info(f"✅ Span export configured for {settings.otlp_endpoint}")
    if settings.trace_console:
        provider.add_span_processor(SimpleSpanProcessor(ConsoleSpanExporter()))
    return provider


def get_tracer(name: str = "rac_grid") -> trace.Tracer:
    global _provider
    if _provider is None:
        _provider = _setup_tracer_provider()
    return _provider.get_tracer(name)


@contextmanager
def traced(name: str, attributes: Optional[Dict[str, Any]] = None, tracer_name: str = "rac_grid") -> Iterator[trace.Span]:
    """Run a block inside a span; exceptions are recorded on the span and re-raised."""
    tracer = get_tracer(tracer_name)
    with tracer.start_as_current_span(name, attributes=attributes or {},
                                      record_exception=False, set_status_on_exception=False) as span:
        try:
            yield span
        except Exception as exc:
            span.record_exception(exc)
            span.set_status(Status(StatusCode.ERROR, str(exc)))
            raise
        else:
            span.set_status(Status(StatusCode.OK))


def flush(timeout_millis: int = 10000) -> bool:
    """Force flush pending spans; True when nothing was pending or the flush succeeded."""
    if _provider is None:
        return True
    return _provider.force_flush(timeout_millis=timeout_millis)
