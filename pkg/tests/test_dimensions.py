"""Closed-form dimensions, windowed fallbacks, and report invariants."""

import math

import pytest
from hypothesis import given, settings

from conftest import catalog_seqs, geometries
from perclab import (
    ExponentSpec,
    FormulaSingularityError,
    ProbSequence,
    dim_assouad,
    dim_hausdorff,
    dim_packing,
    expected_measure,
    expected_measure_limit,
    full_report,
)

WINDOW = (64, 512)


# -- expected measure ----------------------------------------------------------


def test_measure_telescope_is_p():
    assert expected_measure(ProbSequence.power_telescope(0.5, 0.5), 1, 2) == 0.5


def test_measure_mfp_vanishes():
    assert expected_measure(ProbSequence.mfp(0.9), 2, 2) == 0.0


def test_measure_all_ones_is_one():
    assert expected_measure(ProbSequence.explicit([], tail=1.0), 1, 2) == 1.0


def test_measure_limit_for_explicit_tails():
    assert expected_measure_limit(ProbSequence.explicit([0.5], tail=0.9)) == 0.0
    assert expected_measure_limit(ProbSequence.explicit([0.5, 0.8], tail=1.0)) == pytest.approx(0.4)
    assert expected_measure_limit(ProbSequence.explicit([0.5])) is None


# -- single dimensions ----------------------------------------------------------


def test_hausdorff_mfp_half():
    seq = ProbSequence.mfp(2.0**-0.5)
    assert dim_hausdorff(seq, 1, 2) == pytest.approx(0.5, abs=1e-12)


def test_hausdorff_telescope_is_full():
    assert dim_hausdorff(ProbSequence.power_telescope(0.37, 0.61), 2, 3) == 2.0


def test_hausdorff_all_ones_windowed():
    assert dim_hausdorff(ProbSequence.explicit([], tail=1.0), 3, 2) == 3.0


def test_packing_mfp():
    assert dim_packing(ProbSequence.mfp(0.7), 2, 2) == pytest.approx(2 + math.log2(0.7), abs=1e-12)
    assert dim_packing(ProbSequence.mfp(0.7), 2, 2) == pytest.approx(1.4854268271702415)


def test_packing_telescope():
    assert dim_packing(ProbSequence.power_telescope(0.5, 0.5), 1, 2) == 1.0


def test_assouad_matches_packing_on_catalog():
    for seq in (
        ProbSequence.mfp(0.7),
        ProbSequence.power_telescope(0.5, 0.5),
        ProbSequence.power_head(0.6, 2.0),
    ):
        assert dim_assouad(seq, 2, 2) == dim_packing(seq, 2, 2)


def test_all_ones_every_dimension_windowed():
    seq = ProbSequence.explicit([], tail=1.0)
    rep = full_report(seq, 2, 2)
    assert rep.method == "windowed"
    assert rep.hausdorff == rep.packing == rep.assouad == 2.0
    assert rep.expected_measure == 1.0


# -- full report -----------------------------------------------------------------


def test_full_report_mfp_example_values():
    rep = full_report(ProbSequence.mfp(0.9), 2, 2)
    want = 2 + math.log2(0.9)
    for value in (rep.hausdorff, rep.packing, rep.assouad, rep.box_lower, rep.box_upper):
        assert value == pytest.approx(want, abs=1e-12)
    assert rep.expected_measure == 0.0
    assert rep.method == "analytic"
    assert rep.window is None
    assert not rep.degenerate


def test_full_report_telescope_row():
    rep = full_report(ProbSequence.power_telescope(0.75, 0.5), 1, 2)
    assert rep.hausdorff == 1.0
    assert rep.expected_measure == 0.75


def test_box_identities_hold_everywhere():
    for seq in (ProbSequence.mfp(0.8), ProbSequence.explicit([0.9, 0.95], tail=0.99)):
        rep = full_report(seq, 2, 2)
        assert rep.box_lower == rep.hausdorff
        assert rep.box_upper == rep.packing


def test_mfp_coincidence():
    rep = full_report(ProbSequence.mfp(0.55), 3, 2)
    assert abs(rep.hausdorff - rep.packing) < 1e-9
    assert abs(rep.packing - rep.assouad) < 1e-9


def test_degenerate_subcritical():
    rep = full_report(ProbSequence.mfp(0.4), 1, 2)  # alpha below the 1/2 threshold
    assert rep.degenerate
    assert rep.hausdorff == 0.0
    assert rep.expected_measure == 0.0


def test_windowed_report_carries_window():
    rep = full_report(ProbSequence.mfp(0.9), 1, 2, window=WINDOW, method="windowed")
    assert rep.method == "windowed"
    assert rep.window == WINDOW


def test_analytic_method_refused_for_explicit():
    with pytest.raises(Exception):
        full_report(ProbSequence.explicit([0.9], tail=0.95), 1, 2, method="analytic")


@pytest.mark.parametrize("p", [0.55, 0.7, 0.9])
@pytest.mark.parametrize("nm", [(1, 2), (2, 3)])
@pytest.mark.parametrize(
    "family",
    [
        lambda p: ProbSequence.mfp(p),
        lambda p: ProbSequence.power_head(p, 1.5),
        lambda p: ProbSequence.power_telescope(p, 0.5),
    ],
)
def test_windowed_agrees_with_analytic(family, nm, p):
    n, m = nm
    seq = family(p)
    ana = full_report(seq, n, m, window=WINDOW)
    win = full_report(seq, n, m, window=WINDOW, method="windowed")
    assert ana.method == "analytic" and win.method == "windowed"
    for f in ("hausdorff", "packing", "assouad", "expected_measure"):
        assert abs(getattr(ana, f) - getattr(win, f)) < 5e-3, f


def test_power_family_exponent_reduction_two_paths():
    """Hausdorff via the probability route equals the exponent-route oracle.

    For p_k = p^(a_k), the dimension is n + log_m(p) times the limiting
    Cesaro mean of the exponents; the oracle evaluates that mean over the
    same tail window the module uses.
    """
    n, m = 2, 3
    k_lo, k_hi = WINDOW
    for espec in (
        ExponentSpec.constant_one(),
        ExponentSpec.explicit_list([1.8, 1.3, 1.1], 1.0),
        ExponentSpec.geometric_gap(0.5),
    ):
        seq = ProbSequence.power(0.7, espec)
        module_value = dim_hausdorff(seq, n, m, window=WINDOW, method="windowed")
        tail_means = []
        acc = 0.0
        for k in range(k_lo + 1, k_hi + 1):
            acc += espec.a_at(k)
            tail_means.append(acc / (k - k_lo))
        # log_m p < 0 flips which tail mean realizes the liminf of the product
        oracle = max(n + mean * math.log(0.7) / math.log(m) for mean in tail_means)
        oracle = min(oracle, float(n))
        assert abs(module_value - oracle) < 1e-9


def test_packing_singularity_reports_level():
    # p_300 = 1e-300 sits far below m^(-n*300), killing that term's denominator
    prefix = [0.9] * 299 + [1e-300]
    with pytest.warns(UserWarning):
        seq = ProbSequence.explicit(prefix, tail=0.9, strict=False)
    with pytest.raises(FormulaSingularityError) as err:
        dim_packing(seq, 1, 2, window=WINDOW)
    assert err.value.k == 300


# -- invariants over random catalog configurations -------------------------------


@settings(max_examples=60, deadline=None)
@given(seq=catalog_seqs(), nm=geometries())
def test_ordering_invariant_analytic(seq, nm):
    n, m = nm
    rep = full_report(seq, n, m)
    assert 0.0 <= rep.hausdorff <= rep.box_lower + 1e-9
    assert rep.box_lower <= rep.box_upper + 1e-9
    assert rep.box_upper <= rep.assouad + 1e-9
    assert rep.assouad <= n + 1e-9


@settings(max_examples=60, deadline=None)
@given(seq=catalog_seqs(), nm=geometries())
def test_measure_dimension_equivalence_analytic(seq, nm):
    n, m = nm
    rep = full_report(seq, n, m)
    if rep.expected_measure > 0.0:
        assert abs(rep.hausdorff - n) < 1e-9
    if rep.hausdorff < n - 1e-6:
        assert rep.expected_measure == 0.0


def test_report_serialization_field_names():
    d = full_report(ProbSequence.mfp(0.9), 2, 2).to_dict()
    assert set(d) >= {
        "hausdorff",
        "packing",
        "assouad",
        "box_lower",
        "box_upper",
        "expected_measure",
        "method",
        "window",
        "n",
        "m",
    }
