"""Top-level acceptance checks, one test per criterion.

Each test prints a single ``ACCEPTANCE nn: PASS/FAIL`` line straight to
the real stdout (bypassing capture) so the run log always carries the
scoreboard, then asserts.  Stated runtime budgets are asserted where a
criterion carries one.
"""

import math
import sys
import time

import numpy as np
import pytest

from lhsphere import mie, rays, resonance, specfun
from lhsphere.cli import main as cli_main
from lhsphere.core import (
    AtomSite,
    Handedness,
    Medium,
    Polarization,
    SphereSystem,
    VACUUM,
)
from lhsphere.decay import (
    DecayRequest,
    rate_e1_radial,
    rate_e1_tangential,
    rate_m1_radial,
    rate_m1_tangential,
)

LH = Medium(-4.0, -1.05)
RH = Medium(4.0, 1.05)

ALL_RATES = (rate_e1_radial, rate_e1_tangential, rate_m1_radial,
             rate_m1_tangential)


@pytest.fixture
def report(request):
    """Scoreboard writer that survives output capture.

    Emits through pytest's terminal reporter so the PASS/FAIL line for
    each criterion shows up in the ordinary run log, not only on
    failures.
    """
    tr = request.config.pluginmanager.get_plugin("terminalreporter")

    def _report(num, ok, detail):
        line = f"ACCEPTANCE {num:02d}: {'PASS' if ok else 'FAIL'} - {detail}"
        if tr is not None:
            tr.write_line("\n" + line)
        else:
            print(line, file=sys.__stderr__, flush=True)
        return ok

    return _report


def read_csv(path):
    meta, header, rows = {}, None, []
    for line in open(path):
        line = line.strip()
        if line.startswith("#"):
            key, _, val = line[1:].partition("=")
            meta[key.strip()] = val.strip()
        elif header is None:
            header = line.split(",")
        else:
            rows.append([float(v) if i < len(line.split(",")) and c not in
                         ("pol", "termination") else v
                         for i, (c, v) in enumerate(zip(header,
                                                        line.split(",")))])
    return meta, header, rows


def test_acceptance_01_free_space_identity(report):
    t0 = time.perf_counter()
    worst = 0.0
    for x in (0.5, 2.0, 10.0):
        for rho in (1.001, 2.0, 10.0):
            req = DecayRequest(SphereSystem(VACUUM, VACUUM, x), AtomSite(rho))
            for fn in ALL_RATES:
                worst = max(worst, abs(fn(req).ratio - 1.0))
    dt = time.perf_counter() - t0
    ok = worst < 1e-9 and dt < 1.0
    assert report(1, ok, f"free-space rates: max |ratio-1| = {worst:.2e} "
                         f"(tol 1e-9), {dt:.2f}s (< 1s)")


def test_acceptance_02_duality_suite(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240517)

    def draw_const():
        while True:
            v = rng.uniform(-10.0, 10.0)
            if abs(v) >= 0.05:  # exclude zero with a conditioning margin
                return v

    worst_rate = 0.0
    coeff_bitwise = True
    for _ in range(100):
        e1, m1, e2, m2 = (draw_const() for _ in range(4))
        x = rng.uniform(0.01, 5.0)
        rho = rng.uniform(1.0, 5.0)
        sys_a = SphereSystem(Medium(e1, m1), Medium(e2, m2), x)
        sys_b = SphereSystem(Medium(m1, e1), Medium(m2, e2), x)
        site = AtomSite(rho)
        for fm, fe in ((rate_m1_radial, rate_e1_radial),
                       (rate_m1_tangential, rate_e1_tangential)):
            a = fm(DecayRequest(sys_a, site)).ratio
            b = fe(DecayRequest(sys_b, site)).ratio
            worst_rate = max(worst_rate, abs(a - b) / max(abs(b), 1e-300))
        for n in range(1, 11):
            if mie.q_tm(n, sys_a) != mie.p_te(n, sys_b):
                coeff_bitwise = False
    dt = time.perf_counter() - t0
    ok = worst_rate < 1e-12 and coeff_bitwise and dt < 10.0
    assert report(2, ok, f"duality over 100 systems: rate mismatch "
                         f"{worst_rate:.2e} (tol 1e-12), coefficients "
                         f"bitwise={coeff_bitwise}, {dt:.1f}s (< 10s)")


def test_acceptance_03_special_functions(report):
    radii = (0.1, 0.5, 2.0, 7.0, 19.0, 50.0)
    orders = (1, 2, 5, 13, 33, 60)
    worst_w = 0.0
    for r in radii:
        # both j*y products grow like e^{2|Im z|} while their difference
        # stays at 1/z^2, so double precision can only confirm the
        # identity for |Im z| below ~7; complex test points keep Im <= 5
        # (the far-complex regime is covered by the high-precision
        # recompute tests in test_resonance)
        phi = min(1.3, 5.0 / r)
        phi2 = min(0.4, 2.0 / r)
        zs = (complex(r), complex(-r), r * np.exp(1j * phi),
              r * np.exp(-1j * phi), r * np.exp(1j * (np.pi - phi)),
              r * np.exp(1j * phi2))
        for z in zs:
            for n in orders:
                w = (specfun.sph_bessel_j(n, z) * specfun.sph_bessel_y(n - 1, z)
                     - specfun.sph_bessel_j(n - 1, z)
                     * specfun.sph_bessel_y(n, z))
                worst_w = max(worst_w, abs(w * z * z - 1.0))
    # parity under z -> -z
    worst_p = 0.0
    for z in (1.7 + 0.4j, 0.3 - 2.2j, 24.0 + 5.0j):
        for n in (0, 1, 4, 9):
            worst_p = max(
                worst_p,
                abs(specfun.sph_bessel_j(n, -z)
                    - (-1.0) ** n * specfun.sph_bessel_j(n, z))
                / abs(specfun.sph_bessel_j(n, z)),
                abs(specfun.sph_bessel_y(n, -z)
                    - (-1.0) ** (n + 1) * specfun.sph_bessel_y(n, z))
                / abs(specfun.sph_bessel_y(n, z)),
            )
    # small-argument limits
    worst_s = 0.0
    for z in (1e-3, 1e-3 * np.exp(0.7j)):
        for n in range(0, 9):
            ldf = specfun.log_double_factorial
            jlim = z ** n * math.exp(-ldf(2 * n + 1))
            ylim = -math.exp(ldf(2 * n - 1)) / z ** (n + 1)
            worst_s = max(
                worst_s,
                abs(specfun.sph_bessel_j(n, z) / jlim - 1.0),
                abs(specfun.sph_bessel_y(n, z) / ylim - 1.0),
            )
    # three-term recurrence residual, scaled by the largest participant
    worst_r = 0.0
    for z in (0.3, 4.0 + 1.0j, 31.0, 12.0 - 9.0j):
        for table in (specfun.jn_array(40, z), specfun.yn_array(40, z)):
            for n in range(1, 40):
                res = table[n - 1] + table[n + 1] - (2 * n + 1) / z * table[n]
                scale = max(abs(table[n - 1]), abs(table[n + 1]),
                            abs((2 * n + 1) / z * table[n]))
                worst_r = max(worst_r, abs(res) / scale)
    ok = worst_w < 1e-10 and worst_p < 1e-12 and worst_s < 1e-6 \
        and worst_r < 1e-10
    assert report(3, ok, f"Wronskian {worst_w:.2e} (tol 1e-10), parity "
                         f"{worst_p:.2e}, small-z {worst_s:.2e}, "
                         f"recurrence {worst_r:.2e}")


def test_acceptance_04_lossless_unitarity(report):
    rng = np.random.default_rng(20240518)
    worst = 0.0
    for _ in range(50):
        # interior of any sign; host restricted to a propagating medium
        # (eps2*mu2 > 0), where the scattering matrix is defined
        e1 = rng.uniform(0.1, 10.0) * rng.choice((-1.0, 1.0))
        m1 = rng.uniform(0.1, 10.0) * rng.choice((-1.0, 1.0))
        host_sign = rng.choice((-1.0, 1.0))
        e2 = rng.uniform(0.1, 5.0) * host_sign
        m2 = rng.uniform(0.1, 5.0) * host_sign
        x = rng.uniform(0.05, 5.0)
        sys_ = SphereSystem(Medium(e1, m1), Medium(e2, m2), x)
        q_num, q_den, p_num, p_den = mie.coefficient_tables(20, sys_)
        for n in range(1, 21):
            for num, den in ((q_num[n], q_den[n]), (p_num[n], p_den[n])):
                s = 1.0 - 2.0 * num / den
                worst = max(worst, abs(abs(s) - 1.0))
    ok = worst < 1e-8
    assert report(4, ok, f"lossless unitarity |1-2c|: worst deviation "
                         f"{worst:.2e} over 50 systems, n <= 20 (tol 1e-8)")


def test_acceptance_05_fig4_reproduction(report, tmp_path):
    t0 = time.perf_counter()
    out = tmp_path / "fig4.csv"
    assert cli_main(["figure", "fig4", "--out", str(out)]) == 0
    rows = [[float(v) for v in l.split(",")] for l in open(out)
            if l.strip() and not l.startswith("#") and not l.startswith("ka")]
    data = np.array(rows)
    ka, rh, lh = data[:, 0], data[:, 1], data[:, 2]
    dt = time.perf_counter() - t0
    low = ka < 2.5
    lh_peak = lh[low].max()
    lh_at = ka[low][lh[low].argmax()]
    rh_low_max = rh[low].max()
    first_rh = ka[rh >= 0.9].min()
    # Eq-estimate anchors: LH surface mode 1.9930 (15% stated tolerance);
    # the RH whispering-gallery estimate carries an O(n^{-2/3}) edge
    # correction, a factor 1.47 at n=8, so "emerges near" is bounded by
    # 1.5x the leading-order value
    ok = (lh_peak >= 0.9
          and abs(lh_at - 1.9930) / 1.9930 < 0.15
          and rh_low_max < 0.9
          and 0.85 * 3.9036 < first_rh < 1.5 * 3.9036
          and dt < 10.0)
    assert report(5, ok, f"fig4: LH |p8| peak {lh_peak:.3f} at ka="
                         f"{lh_at:.4f} ({abs(lh_at-1.9930)/1.9930:.1%} from "
                         f"1.9930), RH max below 2.5 = {rh_low_max:.1e}, "
                         f"first RH>=0.9 at {first_rh:.3f} "
                         f"(estimate 3.9036), {dt:.1f}s (< 10s)")


def test_acceptance_06_superdecay_magnitude(report):
    t0 = time.perf_counter()
    census = resonance.surface_modes(SphereSystem(LH, VACUUM, 1.0))
    site = AtomSite(1.001)
    center_max = 0.0
    for m in census:
        req = DecayRequest(SphereSystem(LH, VACUUM, m.z_root.real), site)
        center_max = max(center_max, rate_m1_radial(req).ratio,
                         rate_e1_tangential(req).ratio)
    # uniform preset grid, no resonance refinement
    xs = 0.05 + (10.0 - 0.05) * np.arange(1, 4001) / 4000
    grid_max = 0.0
    for x in xs:
        req = DecayRequest(SphereSystem(LH, VACUUM, float(x)), site)
        grid_max = max(grid_max, rate_m1_radial(req).ratio,
                       rate_e1_tangential(req).ratio)
    dt = time.perf_counter() - t0
    ok = center_max > 1e5 and grid_max > 1e4 and dt < 60.0
    assert report(6, ok, f"superdecay: polished-center max rate "
                         f"{center_max:.2e} (> 1e5), uniform-grid max "
                         f"{grid_max:.2e} (> 1e4), {dt:.1f}s (< 60s)")


def test_acceptance_07_mode_census(report):
    nm_te = resonance.n_max(Polarization.TE, LH, VACUUM)
    nm_tm = resonance.n_max(Polarization.TM, LH, VACUUM)
    census = resonance.surface_modes(SphereSystem(LH, VACUUM, 1.0))
    te_orders = sorted(m.order for m in census
                       if m.polarization is Polarization.TE)
    tm_count = sum(m.polarization is Polarization.TM for m in census)
    ok = (abs(nm_te - 20.0) < 1e-12 * 20.0
          and abs(nm_tm - 1.0 / 3.0) < 1e-12
          and te_orders == list(range(1, 20))
          and tm_count == 0)
    assert report(7, ok, f"census: n_max TE = {nm_te:.13f} (= 20), "
                         f"TM = {nm_tm:.15f} (= 1/3); {len(te_orders)} TE "
                         f"modes for n = 1..19, {tm_count} TM modes")


def test_acceptance_08_resonance_signs_and_q(report):
    census = resonance.surface_modes(SphereSystem(LH, VACUUM, 1.0))
    lh_ok = all(m.z_root.imag > 0 and m.q_factor > 0 and m.residual < 1e-10
                and m.handedness_beta == -1 for m in census)
    rh_sys = SphereSystem(RH, VACUUM, 1.0)
    wg = [resonance.find_root(Polarization.TE, 8, rh_sys, seed)
          for seed in (5.5, 9.2)]
    rh_ok = all(m.z_root.imag < 0 and m.q_factor > 0 and m.residual < 1e-10
                and m.handedness_beta == +1 for m in wg)
    q_consistent = all(
        resonance.quality_factor(m, Handedness.LEFT_HANDED) > 0
        for m in census
    ) and all(
        resonance.quality_factor(m, Handedness.RIGHT_HANDED) > 0 for m in wg
    )
    ok = lh_ok and rh_ok and q_consistent
    assert report(8, ok, f"signs: {len(census)} LH roots Im>0 ({lh_ok}), "
                         f"{len(wg)} RH whispering-gallery roots Im<0 "
                         f"({rh_ok}), Q>0 with beta=-/+1 ({q_consistent}), "
                         f"residuals < 1e-10")


def test_acceptance_09_asymptotic_vs_exact(report):
    t0 = time.perf_counter()
    census = {m.order: m for m in
              resonance.surface_modes(SphereSystem(LH, VACUUM, 1.0))}
    worst_re, worst_lnq = 0.0, 0.0
    for n in range(10, 20):
        est = resonance.asymptotic_z(Polarization.TE, n, LH, VACUUM)
        m = census[n]
        worst_re = max(worst_re, abs(m.z_root.real - est.re_z) / est.re_z)
        # est Q = exp(-inv_q_log); compare in logs to dodge overflow
        worst_lnq = max(worst_lnq,
                        abs(math.log(m.q_factor) + est.inv_q_log))
    dt = time.perf_counter() - t0
    ok = worst_re < 0.05 and worst_lnq < math.log(2.0) and dt < 30.0
    assert report(9, ok, f"asymptotics n=10..19: Re(z) off by "
                         f"{worst_re:.1%} (< 5%), Q ratio "
                         f"{math.exp(worst_lnq):.2f}x (< 2x), "
                         f"{dt:.1f}s (< 30s)")


def test_acceptance_10_ray_focusing(report):
    fans = {}
    for name, med in (("rh", RH), ("lh", LH)):
        fans[name] = rays.trace_fan((1.5, 0.0), med, fan_count=61,
                                    max_bounces=8)
    worst_snell = 0.0
    for name, med in (("rh", RH), ("lh", LH)):
        for p in fans[name]:
            res = rays.snell_residuals(p, med)
            if res.size:
                worst_snell = max(worst_snell, res.max())
    spread_lh = rays.crossing_spread(fans["lh"])
    spread_rh = rays.crossing_spread(fans["rh"])
    ok = worst_snell < 1e-10 and spread_lh < spread_rh
    assert report(10, ok, f"rays: worst Snell residual {worst_snell:.1e} "
                          f"(< 1e-10), crossing spread LH {spread_lh:.3f} < "
                          f"RH {spread_rh:.3f}")
