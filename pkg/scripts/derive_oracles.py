"""Independent reference values for the unit tests.

Deliberately written without importing the package: plain floats, brute-force
loops and exact fractions. The printed numbers are frozen into tests/.
"""
import math
from fractions import Fraction


def path_loss(d, a=32.4, b=21.0, f=20.0, fc=28.0):
    return a + b * math.log10(max(d, 1.0)) + f * math.log10(fc)


def thermal_noise(bw_hz, nf_db):
    k = 1.380649e-23
    t0 = 290.0
    return 10 * math.log10(k * t0 * bw_hz * 1000.0) + nf_db


def gain_floor_scan(peak=23.0, bw=10.0, fbr=30.0):
    """Smallest gain over a 0.1 degree azimuth scan with the quadratic lobe."""
    worst = peak
    for i in range(-1800, 1801):
        az = i / 10.0
        att = min(12.0 * (az / bw) ** 2, fbr)
        worst = min(worst, peak - att)
    return worst


def l3_after(periods, k, start, target):
    alpha = 0.5 ** (k / 4.0)
    v = start
    for _ in range(periods):
        v = alpha * target + (1 - alpha) * v
    return v


def ttt_trace(conditions, required):
    """Fire steps of a time-to-trigger automaton run step by step."""
    count, fires = 0, []
    for n, held in enumerate(conditions):
        count = count + 1 if held else 0
        if count >= required:
            fires.append(n)
    return fires


def hof_rate(n_hof, n_ue, seconds):
    return Fraction(n_hof) / (Fraction(n_ue) * Fraction(seconds) / 60)


def rach_two_step(sinr_per_occasion, gamma_out=-8.0):
    for k, s in enumerate(sinr_per_occasion):
        if s > gamma_out:
            return k
    return None


if __name__ == "__main__":
    print("path_loss(100 m)      =", round(path_loss(100.0), 6))
    print("path_loss(1 m)        =", round(path_loss(1.0), 6))
    print("kTB 10 MHz (dBm)      =", round(thermal_noise(10e6, 0.0), 4), "(-174 dBm/Hz rounding gives -104)")
    print("noise -174+70+9       =", -174 + 10 * math.log10(10e6) + 9)
    print("gain floor scan       =", gain_floor_scan())
    print("L3 100 periods, k=4   =", l3_after(100, 4, -60.0, -90.0))
    print("L3 100 periods, k=19  =", l3_after(100, 19, -60.0, -90.0))
    print("TTT 8 req, 7 true+1 f =", ttt_trace([True] * 7 + [False] + [True] * 7, 8))
    print("TTT 8 req, 8 true     =", ttt_trace([True] * 8, 8))
    print("HOF rate 32/320/300s  =", hof_rate(32, 320, 300), float(hof_rate(32, 320, 300)))
    print("RACH two-step         =", rach_two_step([-9.0, -7.5]))
    print("CHO sweep rows/seed   =", 2 * 2 * 2 * 7)
