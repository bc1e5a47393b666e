"""Brute-force measure of the aligned-sphere characteristic set.

On the aligned sphere a root in (0, w) exists at latitude lat for the unit
covector at angle theta from east iff 0 < N cos(lat) cos(theta) < w.  The
cosphere measure is cos(lat) dlat dlon dtheta; longitude contributes 2 pi.
"""
import math

import numpy as np


def aligned_coverage_bruteforce(buoyancy, upper, n=4000):
    lat = -math.pi / 2 + (np.arange(n) + 0.5) * math.pi / n
    th = (np.arange(n) + 0.5) * 2 * math.pi / n
    c = buoyancy * np.cos(lat)[:, None] * np.cos(th)[None, :]
    inside = (c > 0) & (c < upper)
    w = np.cos(lat)[:, None] * (math.pi / n) * (2 * math.pi / n)
    return 2 * math.pi * float(np.sum(inside * w))
