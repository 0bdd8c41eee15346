"""
Planning a Lissajous scan
=========================

Two cosines with frequency ratio 2N/(2N - 1) draw a closed curve over the
scan rectangle once per frame.  More lines per frame (larger N) means a finer
scan.
"""

from quantrack import LissajousSpec, measure_scan_gap, plan_frequencies, required_N, scan_resolution

spec = LissajousSpec(ax=1.0, ay=1.0, N=30, f=1.0)
wx, wy, period = plan_frequencies(spec)
print(f"omega_x = {wx:.4f} rad/s, omega_y = {wy:.4f} rad/s, motion repeats every {period} s")
print(f"predicted line spacing h = {scan_resolution(spec):.5f} um")
print(f"measured widest gap      = {measure_scan_gap(spec, samples=200_000):.5f} um")

for h in (0.1, 0.05, 0.01):
    print(f"h <= {h} um needs N = {required_N(1.0, 1.0, h)}")
