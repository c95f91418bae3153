"""Shared pytest configuration.

Keeps hypothesis deadlines off: several properties run the full pipeline
on generated traces, whose wall time varies too much for per-example
deadlines to be meaningful.
"""

from __future__ import annotations

from hypothesis import HealthCheck, settings

settings.register_profile(
    "suite",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")
