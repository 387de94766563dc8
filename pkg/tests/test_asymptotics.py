"""Frequency formulas, leading terms, and the decay verdict."""

import math
from functools import lru_cache

import numpy as np
import pytest

from conftest import (
    baseline_spec,
    build_spec,
    indefinite_spec,
    mixed_spec,
    random_spec,
    steep_spec,
)
from oracles import baseline_char, steep_char
from sl2t.asymptotics import (
    AsymptoticCase,
    case_of,
    decay_check,
    delta3_from_boundary,
    delta_leading,
    delta_leading_general,
    eigenfunction_asymptotic,
    mu_asymptotic,
    phase_coherent,
    phi_asymptotic,
)
from sl2t.charfn import char_batch, char_value
from sl2t.problem import phase
from sl2t.shooting import build_left
from sl2t.spectrum import EigenRecord, locate_eigenvalues


@lru_cache(maxsize=None)
def _baseline_records():
    return locate_eigenvalues(baseline_spec(), 13).records


# ---------------------------------------------------------------------------
# case classification and frequency prediction


def test_case_classification():
    assert case_of(steep_spec()) is AsymptoticCase.CASE1
    assert case_of(build_spec(alpha=0.0, beta=(-1.0, 0.0), beta_prime=(0.0, 1.0))) is AsymptoticCase.CASE2
    assert case_of(build_spec(alpha=math.pi / 2, beta=(0.0, 1.0), beta_prime=(1.0, 0.0))) is AsymptoticCase.CASE3
    assert case_of(baseline_spec()) is AsymptoticCase.CASE4


def test_tiny_alpha_counts_as_dirichlet_like():
    spec = build_spec(alpha=1e-13, beta=(-1.0, 0.0), beta_prime=(0.0, 1.0))
    assert case_of(spec) is AsymptoticCase.CASE2


def test_mu_asymptotic_known_values():
    assert mu_asymptotic(steep_spec(), 5) == pytest.approx(2.0 * math.pi, abs=1e-15)
    assert mu_asymptotic(baseline_spec(), 3) == pytest.approx(1.5 * math.pi, abs=1e-15)


def test_mu_asymptotic_gap_is_pi_over_total_phase():
    spec = mixed_spec()
    total = phase(spec, 1.0)
    mus = [mu_asymptotic(spec, n) for n in range(1, 9)]
    for a, b in zip(mus, mus[1:]):
        assert b - a == pytest.approx(math.pi / total, abs=1e-13)


def test_mu_asymptotic_accepts_phase_override():
    got = mu_asymptotic(baseline_spec(), 3, phase_total=7.0 / 3.0)
    assert got == pytest.approx(9.0 * math.pi / 7.0, abs=1e-14)


def test_mu_asymptotic_validation():
    with pytest.raises(ValueError):
        mu_asymptotic(baseline_spec(), 0)
    with pytest.raises(ValueError):
        mu_asymptotic(baseline_spec(), 3, phase_total=-2.0)


# ---------------------------------------------------------------------------
# left-solution leading term


def _coherent_specs():
    # zero potential and matched interface ratios: no reflected wave, so the
    # leading term is the whole solution and the comparison is exact
    return [
        build_spec(alpha=math.pi / 2, beta=(-1.0, 0.0), beta_prime=(0.0, 1.0)),
        baseline_spec(),
        build_spec(
            alpha=math.pi / 2,
            beta=(-1.0, 0.0),
            beta_prime=(0.0, 1.0),
            omega=(2.0, 1.0, 3.0),
            gamma=(2.0, 1.0, 1.0, 3.0),
        ),
        build_spec(alpha=0.0, omega=(2.0, 1.0, 1.0), gamma=(2.0, 1.0, 1.0, 1.0)),
        build_spec(alpha=math.pi / 2, beta=(-1.0, 0.0), beta_prime=(0.0, 1.0),
                   gamma=(2.0, 2.0, 3.0, 3.0)),
    ]


@pytest.mark.parametrize("idx", range(5))
def test_phi_asymptotic_is_exact_without_reflection(idx):
    spec = _coherent_specs()[idx]
    assert phase_coherent(spec)
    mu = 7.3
    sol = build_left(spec, mu * mu)
    xs = [-1.0, -0.8, -0.45, spec.h1, -0.1, 0.2, spec.h2, 0.5, 0.77, 1.0]
    for x in xs:
        st = sol.state(x, side="right" if x < 1.0 else "left")
        scale = abs(st.u) + abs(st.v) / mu
        assert phi_asymptotic(spec, mu, x) == pytest.approx(st.u, abs=1e-8 * scale)
        assert phi_asymptotic(spec, mu, x, k=1) == pytest.approx(st.v, abs=1e-8 * mu * scale)


def test_phi_asymptotic_left_end_value_is_launch_value():
    for spec in (steep_spec(), mixed_spec()):
        assert phi_asymptotic(spec, 11.0, -1.0) == pytest.approx(math.sin(spec.alpha), abs=1e-15)


def test_phi_asymptotic_piece3_amplitude():
    spec = build_spec(alpha=math.pi / 2, beta=(-1.0, 0.0), beta_prime=(0.0, 1.0),
                      gamma=(2.0, 2.0, 3.0, 3.0))
    mu = 9.0
    want = 6.0 * math.cos(mu * phase(spec, 0.9))
    assert phi_asymptotic(spec, mu, 0.9) == pytest.approx(want, abs=1e-14)


def test_phi_asymptotic_validation():
    with pytest.raises(ValueError):
        phi_asymptotic(baseline_spec(), -2.0, 0.0)
    with pytest.raises(ValueError):
        phi_asymptotic(baseline_spec(), 3.0, 0.0, k=2)


# ---------------------------------------------------------------------------
# boundary-form route to the right-piece characteristic value


def test_delta3_routes_agree_on_random_problems():
    rng = np.random.default_rng(20)
    for _ in range(8):
        spec = random_spec(rng)
        for lam in rng.uniform(-15.0, 150.0, size=3):
            lam = float(lam)
            end = build_left(spec, lam).at_right
            via_boundary = delta3_from_boundary(spec, lam, end)
            via_wronskian = char_value(spec, lam).on_piece[2]
            tol = 1e-8 * (1.0 + abs(via_wronskian))
            assert abs(via_boundary - via_wronskian) <= tol


def test_delta3_is_affine_in_lambda():
    spec = mixed_spec()
    end = build_left(spec, 3.0).at_right
    a, b = delta3_from_boundary(spec, -5.0, end), delta3_from_boundary(spec, 9.0, end)
    mid = delta3_from_boundary(spec, 2.0, end)
    assert a + b == pytest.approx(2.0 * mid, rel=1e-12)


# ---------------------------------------------------------------------------
# leading term of the canonical characteristic value


def test_delta_leading_requires_case1():
    with pytest.raises(ValueError, match="CASE1"):
        delta_leading(baseline_spec(), 10.0)
    assert delta_leading(steep_spec(), 10.0) == delta_leading_general(steep_spec(), 10.0)


def test_delta_leading_vanishes_at_phase_nodes():
    # sin(mu * Theta(1)) = 0 at mu = k*pi/2 for the steep problem
    assert abs(delta_leading(steep_spec(), math.pi)) <= 1e-11


def _case_specs():
    return {
        AsymptoticCase.CASE1: steep_spec(),
        AsymptoticCase.CASE2: build_spec(alpha=0.0, beta=(-1.0, 0.0), beta_prime=(0.0, 1.0)),
        AsymptoticCase.CASE3: build_spec(alpha=math.pi / 2, beta=(0.0, 1.0), beta_prime=(1.0, 0.0)),
        AsymptoticCase.CASE4: baseline_spec(),
    }


@pytest.mark.parametrize("which", list(AsymptoticCase))
def test_delta_leading_ratio_approaches_one(which):
    spec = _case_specs()[which]
    assert case_of(spec) is which
    total = phase(spec, 1.0)
    # extremal probes of the leading oscillation, plus slightly offset ones
    if which in (AsymptoticCase.CASE1, AsymptoticCase.CASE4):
        base = [(k + 0.5) * math.pi / total for k in (26, 33, 44)]
    else:
        base = [k * math.pi / total for k in (27, 34, 45)]
    probes = base + [m + 0.2 for m in base[:2]]
    lams = np.array([m * m for m in probes])
    vals = char_batch(spec, lams)
    for mu, val in zip(probes, vals):
        lead = delta_leading_general(spec, mu)
        assert abs(val / lead - 1.0) <= 0.05, (which, mu, val / lead)


def test_delta_leading_general_validation():
    with pytest.raises(ValueError):
        delta_leading_general(baseline_spec(), 0.0)


# ---------------------------------------------------------------------------
# eigenfunction shape


def test_eigenfunction_asymptotic_end_values():
    spec = steep_spec()
    assert eigenfunction_asymptotic(spec, 4, -1.0) == pytest.approx(1.0, abs=1e-15)
    assert eigenfunction_asymptotic(baseline_spec(), 4, -1.0) == pytest.approx(0.0, abs=1e-15)


def test_eigenfunction_asymptotic_interface_amplification():
    spec = build_spec(alpha=math.pi / 2, beta=(-1.0, 0.0), beta_prime=(0.0, 1.0),
                      gamma=(2.0, 2.0, 3.0, 3.0))
    # CASE1: mu_n * Theta(1) is a multiple of pi, so both ends sit at extrema
    left = eigenfunction_asymptotic(spec, 6, -1.0)
    right = eigenfunction_asymptotic(spec, 6, 1.0)
    assert abs(right) / abs(left) == pytest.approx(6.0, abs=1e-12)


def test_eigenfunction_asymptotic_vectorized():
    spec = mixed_spec()
    xs = np.linspace(-1.0, 1.0, 41)
    arr = eigenfunction_asymptotic(spec, 7, xs)
    scalars = [eigenfunction_asymptotic(spec, 7, float(x)) for x in xs]
    assert np.allclose(arr, scalars, rtol=0.0, atol=0.0)


def test_eigenfunction_asymptotic_matches_computed_shape():
    from sl2t.spectrum import eigenfunction

    spec = baseline_spec()
    rec = _baseline_records()[10]  # computed index 11 pairs with formula index 10
    assert rec.n == 11
    ef = eigenfunction(spec, rec, samples_per_piece=30)
    xs = np.concatenate([p.xs for p in ef.pieces])
    got = np.concatenate([p.u for p in ef.pieces])
    want = eigenfunction_asymptotic(spec, 10, xs)
    got = got / np.max(np.abs(got))
    want = want / np.max(np.abs(want))
    if float(np.dot(got, want)) < 0.0:
        want = -want
    assert np.max(np.abs(got - want)) <= 0.1


# ---------------------------------------------------------------------------
# reflection-free classification


def test_phase_coherence_classification():
    assert phase_coherent(baseline_spec())
    assert phase_coherent(build_spec(gamma=(2.0, 2.0, 3.0, 3.0)))
    assert phase_coherent(build_spec(omega=(2.0, 1.0, 3.0), gamma=(2.0, 1.0, 1.0, 3.0)))
    assert not phase_coherent(mixed_spec())
    assert not phase_coherent(indefinite_spec())
    assert not phase_coherent(build_spec(gamma=(2.0, 1.0, 1.0, 1.0)))


# ---------------------------------------------------------------------------
# decay of the frequency defect


def _synthetic_records(spec, ns):
    recs = []
    for j, n in enumerate(ns, start=1):
        mu = mu_asymptotic(spec, n)
        recs.append(
            EigenRecord(n=j, lambda_n=mu * mu, mu_n=mu, bracket=(mu * mu - 1e-9, mu * mu + 1e-9),
                        abs_delta=0.0, refinement_iters=1)
        )
    return recs


def test_decay_check_perfect_agreement():
    spec = steep_spec()
    recs = _synthetic_records(spec, range(2, 16))
    report = decay_check(recs, spec, 5, 12, 1e-9)
    assert report.verdict
    assert report.max_product == 0.0
    assert report.offset == 1  # formula index 5 pairs with computed index 4
    assert report.ns == tuple(range(5, 13))


def test_decay_check_baseline_holds():
    report = decay_check(_baseline_records(), baseline_spec(), 5, 12, 1.0)
    assert report.verdict
    assert report.offset == -1
    assert 0.0 < report.max_product <= 0.45
    # errors themselves shrink roughly like 1/n
    assert report.errors[-1] < report.errors[0]


def test_decay_check_rejects_wrong_phase_denominator():
    # deliberately mis-sized interval:ver products grow linearly and bust the bound
    report = decay_check(
        _baseline_records(), baseline_spec(), 5, 12, 1.0, phase_total=7.0 / 3.0
    )
    assert not report.verdict
    assert report.max_product > 1.0


def test_decay_check_missing_indices():
    recs = _synthetic_records(steep_spec(), range(2, 8))
    with pytest.raises(ValueError, match="missing"):
        decay_check(recs, steep_spec(), 5, 12, 1.0)


def test_decay_check_validation():
    recs = _synthetic_records(steep_spec(), range(2, 16))
    with pytest.raises(ValueError):
        decay_check(recs, steep_spec(), 0, 12, 1.0)
    with pytest.raises(ValueError):
        decay_check(recs, steep_spec(), 5, 12, -1.0)
