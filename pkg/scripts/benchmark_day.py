#!/usr/bin/env python3
"""Time the hybrid pipeline on a day-long high-rate synthetic trace.

Builds one appliance cycle per hour (half an hour on, staggered rated
powers) with Gaussian sample noise, then reports wall time and
throughput for the full pipeline:

    python3 scripts/benchmark_day.py --hours 24 --rate 60 --repeats 3
"""

from __future__ import annotations

import argparse
import sys
import time

from nilmevents import ApplianceSpec, ScenarioSpec, detect_hybrid, generate_scenario


def day_spec(hours: int, rate_hz: float, noise_std: float, seed: int) -> ScenarioSpec:
    appliances = tuple(
        ApplianceSpec(
            label=f"a{hour}",
            power_watts=200.0 + 50.0 * (hour % 5),
            on_time_s=3600.0 * hour + 600.0,
            off_time_s=3600.0 * hour + 2400.0,
        )
        for hour in range(hours)
    )
    return ScenarioSpec(
        sampling_rate_hz=rate_hz,
        duration_s=3600.0 * hours,
        appliances=appliances,
        noise_std_watts=noise_std,
        seed=seed,
    )


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--hours", type=int, default=24)
    parser.add_argument("--rate", type=float, default=60.0, help="sampling rate in Hz")
    parser.add_argument("--noise", type=float, default=2.0, help="noise std in watts")
    parser.add_argument("--seed", type=int, default=9)
    parser.add_argument("--repeats", type=int, default=1)
    args = parser.parse_args(argv)

    spec = day_spec(args.hours, args.rate, args.noise, args.seed)
    started = time.perf_counter()
    series, _ = generate_scenario(spec)
    print(f"generated {len(series)} samples in {time.perf_counter() - started:.2f} s")

    for run in range(1, args.repeats + 1):
        started = time.perf_counter()
        result = detect_hybrid(series)
        elapsed = time.perf_counter() - started
        counts = result.stage_counts
        print(
            f"run {run}: {elapsed:.2f} s "
            f"({len(series) / elapsed / 1e6:.2f} Msamples/s) "
            f"stages {counts.base}/{counts.after_derivative}/{counts.after_filtering}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
