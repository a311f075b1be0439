import math

import numpy as np
import pytest

from cavityring.exceptions import EigensolverError, InvalidInputError, SingularPointError
from cavityring.hamiltonian import HamiltonianMatrix, RingTopology
from cavityring.hilbert import enumerate_basis
from cavityring.spectra import (
    QUOTED_THREE_CAVITY_VALUES,
    LevelStatus,
    Verdict,
    analytic_levels,
    analytic_ring_one_exc,
    analytic_two_cavity_one_exc,
    analytic_two_cavity_two_exc,
    compare,
    diagonalize,
    oracle_spectrum,
    photon_representative,
    tabulate_spectrum,
    three_cavity_two_exc_report,
    two_cavity_two_exc_eigenvalues,
)
from cavityring.system_params import SystemParams

LABELS = tuple(enumerate_basis(SystemParams(n_cavities=3, fock_cutoff=3), 3))


def labelled(entries) -> HamiltonianMatrix:
    entries = np.asarray(entries, dtype=complex)
    return HamiltonianMatrix(entries=entries, basis=LABELS[: len(entries)])


def test_diagonalize_diagonal_matrix():
    spectrum = diagonalize(labelled(np.diag([3.0, 1.0, 2.0])))
    assert spectrum.eigenvalues == pytest.approx([1.0, 2.0, 3.0])
    assert np.allclose(np.abs(spectrum.eigenvectors), [[0, 0, 1], [1, 0, 0], [0, 1, 0]])
    assert spectrum.component(0, LABELS[1]) == pytest.approx(1.0)


def test_diagonalize_two_by_two():
    spectrum = diagonalize(labelled([[0.0, 1.0], [1.0, 1.0]]))
    assert spectrum.eigenvalues == pytest.approx([(1 - math.sqrt(5)) / 2, (1 + math.sqrt(5)) / 2])


def test_diagonalize_empty_matrix():
    spectrum = diagonalize(HamiltonianMatrix(entries=np.zeros((0, 0), dtype=complex), basis=()))
    assert len(spectrum) == 0


def test_diagonalize_rejects_non_hermitian():
    with pytest.raises(InvalidInputError):
        diagonalize(labelled([[0.0, 1.0], [0.0, 0.0]]))


def test_diagonalize_reports_residual_failure(mocker):
    mocker.patch("cavityring.spectra.scipy.linalg.eigh", return_value=(np.array([0.0, 1.0]), np.eye(2)))
    with pytest.raises(EigensolverError):
        diagonalize(labelled([[0.0, 1.0], [1.0, 0.0]]))


def test_random_hermitian_residual_gram_and_trace():
    rng = np.random.default_rng(7)
    A = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    H = labelled(A + A.conj().T)
    spectrum = diagonalize(H)
    V, values = spectrum.eigenvectors, spectrum.eigenvalues
    assert np.all(np.diff(values) >= 0)
    assert np.max(np.abs(H.entries @ V - V * values)) <= 1e-10 * np.linalg.norm(H.entries, 2)
    assert np.max(np.abs(V.conj().T @ V - np.eye(6))) <= 1e-12
    assert np.sum(values) == pytest.approx(np.trace(H.entries).real, abs=1e-10)


def test_degenerate_cluster_is_canonical():
    angle = 0.3
    R = np.array([[math.cos(angle), -math.sin(angle), 0], [math.sin(angle), math.cos(angle), 0], [0, 0, 1]])
    rotated = R @ np.diag([1.0, 1.0, 2.0]) @ R.T
    first = diagonalize(labelled(np.diag([1.0, 1.0, 2.0])))
    second = diagonalize(labelled(rotated))
    assert np.allclose(first.eigenvectors, np.eye(3), atol=1e-12)
    assert np.allclose(second.eigenvectors, first.eigenvectors, atol=1e-12)
    assert first.is_degenerate(0) and first.is_degenerate(1) and not first.is_degenerate(2)


def test_phase_convention_makes_largest_component_positive():
    spectrum = diagonalize(labelled([[0.0, -1j], [1j, 0.0]]))
    for column in range(2):
        vector = spectrum.eigenvectors[:, column]
        pivot = vector[np.argmax(np.round(np.abs(vector), 10))]
        assert pivot.imag == pytest.approx(0.0, abs=1e-15)
        assert pivot.real > 0


def test_two_cavity_two_excitation_oracle_at_zero_hopping():
    _, spectrum = oracle_spectrum(SystemParams(n_cavities=2, g=1.0, chi=0.0), 2)
    expected = [-2.0, -math.sqrt(2), 0.0, math.sqrt(2), 2.0]
    assert spectrum.eigenvalues == pytest.approx(expected, abs=1e-10)


def test_analytic_decoupled_doublet():
    upper, lower = analytic_two_cavity_one_exc(1.0, 0.0)
    assert (upper.eigenvalue, lower.eigenvalue) == pytest.approx((1.0, -1.0))
    assert upper.coefficients == pytest.approx((1 / math.sqrt(2), 1 / math.sqrt(2)))
    assert lower.coefficients == pytest.approx((1 / math.sqrt(2), -1 / math.sqrt(2)))
    assert upper.norm == pytest.approx(1.0, abs=1e-12)


def test_analytic_needs_a_coupling():
    with pytest.raises(InvalidInputError):
        analytic_two_cavity_one_exc(0.0, 0.0)
    with pytest.raises(InvalidInputError):
        analytic_two_cavity_one_exc(-1.0, 1.0)


def test_phase_pi_flips_the_hopping_sign():
    for g, chi in [(1.0, 1.0), (0.4, 2.5)]:
        flipped = analytic_two_cavity_one_exc(g, chi, math.pi)
        mirrored = analytic_two_cavity_one_exc(g, -chi, 0.0)
        assert [lv.eigenvalue for lv in flipped] == pytest.approx([lv.eigenvalue for lv in mirrored])


def test_two_excitation_formula_values():
    values = two_cavity_two_exc_eigenvalues(1.0, 0.0)
    assert list(values.values()) == pytest.approx([-2.0, -1.0, 0.0, 1.0, 2.0], abs=1e-12)
    outer = two_cavity_two_exc_eigenvalues(1.0, 1.0)[2]
    assert outer == pytest.approx(math.sqrt((8 + math.sqrt(40)) / 2), abs=1e-12)


def test_two_excitation_singular_points():
    with pytest.raises(SingularPointError) as info:
        analytic_two_cavity_two_exc(1.0, 0.0)
    assert info.value.level == -1
    levels = analytic_two_cavity_two_exc(1.0, 0.0, on_singular="omit")
    assert [lv.level_index for lv in levels if lv.coefficients is None] == [-1, 1]
    assert all(lv.status is LevelStatus.FORMULA_VALUE for lv in levels)
    assert math.isnan(levels[1].norm)


def test_two_excitation_coefficients_are_normalized_away_from_singular_points():
    for level in analytic_two_cavity_two_exc(1.0, 1.0):
        assert level.norm == pytest.approx(1.0, abs=1e-9)


def test_ring_formula_examples():
    assert sorted(lv.eigenvalue for lv in analytic_ring_one_exc(1.0, 1.0)) == pytest.approx(
        [1 - math.sqrt(2), 1 + math.sqrt(2)]
    )
    assert sorted(lv.eigenvalue for lv in analytic_ring_one_exc(3.0, 4.0)) == pytest.approx([-1.0, 9.0])
    _, spectrum = oracle_spectrum(SystemParams(n_cavities=3, g=3.0, chi=4.0), 1)
    assert spectrum.eigenvalues == pytest.approx([-1.0, 9.0], abs=1e-10)


def test_ring_formula_needs_three_cavities():
    with pytest.raises(InvalidInputError):
        analytic_ring_one_exc(1.0, 1.0, n_cavities=2)


def test_single_excitation_formulas_match_oracle_at_random_points():
    rng = np.random.default_rng(2024)
    for g, chi in rng.uniform(1e-3, 5.0, size=(100, 2)):
        for phi in (0.0, math.pi):
            _, spectrum = oracle_spectrum(SystemParams(n_cavities=2, g=g, chi=chi, phi=phi), 1)
            report = compare(analytic_two_cavity_one_exc(g, chi, phi), spectrum)
            assert all(item.verdict is Verdict.MATCH for item in report.items), report
            assert all(item.coefficient_deviation <= 1e-10 for item in report.items)
        _, spectrum = oracle_spectrum(SystemParams(n_cavities=3, g=g, chi=chi), 1)
        report = compare(analytic_ring_one_exc(g, chi, 3), spectrum)
        assert report.max_deviation <= 1e-10


def test_compare_reports_the_two_photon_factor():
    _, spectrum = oracle_spectrum(SystemParams(n_cavities=2, g=1.0, chi=0.0), 2)
    report = compare(analytic_two_cavity_two_exc(1.0, 0.0, on_singular="omit"), spectrum, "two-exc")
    deviations = [item.deviation for item in report.items]
    assert deviations == pytest.approx([0.0, math.sqrt(2) - 1, 0.0, math.sqrt(2) - 1, 0.0], abs=1e-10)
    assert report.verdicts()["two-exc/level[-1]"] is Verdict.MISMATCH
    assert report.verdicts()["two-exc/level[-2]"] is Verdict.MATCH


def test_compare_two_cavity_doublet_matches():
    _, spectrum = oracle_spectrum(SystemParams(n_cavities=2, g=1.0, chi=1.0), 1)
    report = compare(analytic_two_cavity_one_exc(1.0, 1.0), spectrum)
    assert report.max_deviation <= 1e-10
    assert set(report.verdicts().values()) == {Verdict.MATCH}


def test_compare_length_mismatch():
    _, spectrum = oracle_spectrum(SystemParams(n_cavities=2, g=1.0, chi=1.0), 2)
    with pytest.raises(InvalidInputError):
        compare(analytic_two_cavity_one_exc(1.0, 1.0), spectrum)


def test_compare_empty_lists():
    empty = diagonalize(HamiltonianMatrix(entries=np.zeros((0, 0), dtype=complex), basis=()))
    report = compare([], empty)
    assert report.items == []
    assert report.max_deviation == 0.0


def test_three_cavity_two_excitation_report():
    report = three_cavity_two_exc_report(1.0)
    levels = report.items[:5]
    assert [item.analytic for item in levels] == pytest.approx(list(QUOTED_THREE_CAVITY_VALUES))
    assert all(np.isfinite(item.oracle) for item in levels)
    trace = report.items[5]
    assert trace.check == "spectra/three-cavity-two-exc/trace"
    assert trace.deviation <= 1e-10
    doubled = three_cavity_two_exc_report(2.0)
    for a, b in zip(levels, doubled.items[:5]):
        assert b.oracle == pytest.approx(2 * a.oracle, abs=1e-10)


def test_three_cavity_report_rejects_zero_coupling():
    with pytest.raises(InvalidInputError):
        three_cavity_two_exc_report(0.0)


@pytest.mark.parametrize("cavities, n_ex", [(2, 2), (3, 2), (4, 1)])
def test_oracle_spectrum_is_homogeneous(cavities, n_ex):
    _, base = oracle_spectrum(SystemParams(n_cavities=cavities, g=0.7, chi=0.3), n_ex)
    _, scaled = oracle_spectrum(SystemParams(n_cavities=cavities, g=2.1, chi=0.9), n_ex)
    assert scaled.eigenvalues == pytest.approx(3 * base.eigenvalues, abs=1e-10)


def test_oracle_spectrum_rejects_unknown_order():
    params = SystemParams(n_cavities=2)
    with pytest.raises(InvalidInputError):
        oracle_spectrum(params, 1, order=[photon_representative(3)])


def test_analytic_levels_availability():
    assert len(analytic_levels(SystemParams(n_cavities=2, g=1.0, chi=1.0), 1)) == 2
    assert analytic_levels(SystemParams(n_cavities=3, g=1.0, chi=1.0), 2) is None
    assert analytic_levels(SystemParams(n_cavities=3, g=1.0, chi=1.0, phi="pi"), 1) is None
    assert analytic_levels(SystemParams(n_cavities=2, g=0.0, chi=0.0), 1) is None


def test_tabulate_spectrum_with_closed_form():
    rows = tabulate_spectrum(SystemParams(n_cavities=2, g=1.0, chi=1.0), 1)
    assert [row["level"] for row in rows] == [1, 2]
    assert all(row["deviation"] <= 1e-10 for row in rows)
    assert all(row["paper_ref"] is None for row in rows)


def test_tabulate_spectrum_carries_quoted_values():
    rows = tabulate_spectrum(SystemParams(n_cavities=3, g=1.0, chi=1.0), 2)
    assert len(rows) == 5
    assert [row["paper_ref"] for row in rows] == pytest.approx(list(QUOTED_THREE_CAVITY_VALUES))
    assert all(row["analytic"] is None for row in rows)
    assert all(len(row["coefficients"]) == 5 for row in rows)


def test_tabulate_product_basis():
    rows = tabulate_spectrum(SystemParams(n_cavities=2, g=1.0, chi=0.5), 1, collective=False)
    assert len(rows) == 4
    assert all(row["analytic"] is None for row in rows)


def test_tabulate_attaches_ring_formula_only_on_the_ring():
    params = SystemParams(n_cavities=4, g=1.0, chi=1.0)
    ring = tabulate_spectrum(params, 1, topology=RingTopology.ring(4))
    assert all(row["deviation"] <= 1e-10 for row in ring)
    all_pairs = tabulate_spectrum(params, 1, topology=RingTopology.all_pairs(4))
    assert [row["oracle"] for row in all_pairs] == pytest.approx([1.5 - math.sqrt(13) / 2, 1.5 + math.sqrt(13) / 2])
    assert all(row["analytic"] is None and row["deviation"] is None for row in all_pairs)
    triangle = tabulate_spectrum(SystemParams(n_cavities=3, g=1.0, chi=1.0), 1, topology=RingTopology.all_pairs(3))
    assert all(row["analytic"] is not None for row in triangle)
