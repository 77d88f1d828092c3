"""Catalog loading, schema validation, and the self-certifying regression."""

import textwrap

import pytest

from liesym.catalog import CatalogError, load_catalog, run_regression


@pytest.fixture(scope="module")
def catalog():
    return load_catalog()


def test_load_builtin(catalog):
    assert {"eq1", "eq4", "eq5", "ovsiannikov", "special-case",
            "heat"} <= set(catalog)
    assert catalog["eq5"] is catalog["eq4"]


def test_schema_violation(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("cases:\n  - id: broken\n    basis: []\n")
    with pytest.raises(CatalogError) as err:
        load_catalog(str(bad))
    assert "params" in str(err.value)
    assert "cases[0]" in str(err.value)


def test_not_yaml(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("cases: [unbalanced")
    with pytest.raises(CatalogError):
        load_catalog(str(bad))


def test_full_regression_passes(catalog):
    report = run_regression(catalog, audit_samples=150)
    assert report.ok, report.summary()


def test_injected_wrong_generator_fails(tmp_path, catalog):
    """Negative control: a catalog claiming x*Dx as a symmetry of the
    drift-free equation must fail with the nonzero residual displayed."""
    doc = textwrap.dedent("""
        cases:
          - id: broken-claim
            params: {m: "2", p: "1", b0: "0", b1: "1", c0: "0", c1: "0"}
            basis: ["Dt", "x*Dx"]
    """)
    path = tmp_path / "bad.yaml"
    path.write_text(doc)
    report = run_regression(load_catalog(str(path)), audit_samples=50)
    assert not report.ok
    failures = report.failures()
    assert any("x*Dx" in f.check and "residual" in f.detail
               for f in failures)


def test_parallel_jobs_give_same_results(catalog):
    a = run_regression(catalog, case_ids=["heat", "eq1"], audit_samples=50)
    b = run_regression(catalog, case_ids=["heat", "eq1"], audit_samples=50,
                       jobs=2)
    assert [r.line() for r in a.results] == [r.line() for r in b.results]
