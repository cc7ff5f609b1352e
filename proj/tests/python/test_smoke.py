from fractions import Fraction

import pytest

import riffle


def test_gsr_two_card_law():
    law = riffle.exact_ordering_distribution("gsr", 2)
    assert law == {"12": Fraction(3, 4), "21": Fraction(1, 4)}


def test_measure_object():
    mu = riffle.Measure.resolve("gsr")
    assert mu.purely_atomic
    assert mu.diffuse_mass == 0
    assert mu.cdf(Fraction(1, 2)) == Fraction(1, 2)
    assert mu.cdf_left(Fraction(1, 2)) == 0
    assert mu.conjugate().conjugate() == mu
    assert mu.is_quasi_uniform()


def test_gatekeeping():
    assert riffle.is_quasi_uniform("mixed")
    assert not riffle.is_quasi_uniform("interior-atom")


def test_sampling_is_seeded():
    a = riffle.sample_orderings("gsr", 3, 50, 7)
    assert a == riffle.sample_orderings("gsr", 3, 50, 7)
    assert set(a) <= {"123", "132", "213", "231", "312", "321"}
    assert riffle.sample_orderings("gap(0,1,left)", [5, 40, 1000], 3, 1) == ["321"] * 3


def test_kernels_and_mixing():
    assert riffle.kernel_row_exact("deterministic:gsr", 3) == riffle.exact_step_distribution("gsr", 3, "two")
    assert riffle.mixing_curve("lebesgue", 3, "one", 2) == [Fraction(5, 6), 0, 0]
    assert riffle.tv_distance({"12": 1}, {"12": Fraction(1, 2), "21": Fraction(1, 2)}) == Fraction(1, 2)
    pieces = riffle.shuffle_map("gsr")
    assert pieces == [(0, Fraction(1, 2), 2, 0), (Fraction(1, 2), 1, 2, -1)]
    path = riffle.walk("nu_mu:gsr", 4, 5, 3)
    assert len(path) == 6 and path[0] == "1234"


def test_errors_raise():
    with pytest.raises(riffle.RiffleError):
        riffle.shuffle_map("lebesgue")
    with pytest.raises(ValueError):
        riffle.Measure.resolve("nonsense")


def test_verify_and_cli():
    report = riffle.verify("gsr", seed=1, samples=5000)
    assert all(c["passed"] for c in report["checks"])
    code, out, err = riffle.run_cli(["oracle", "--measure", "gsr", "--n", "2", "--format", "csv"])
    assert code == 0
    assert out == "permutation,probability\n12,3/4\n21,1/4\n"
