from math import sqrt

import numpy as np
import pytest

from refkato.catalog import FAMILIES, CatalogError, default_catalog_path, load_catalog, parse_catalog
from refkato.exterior import BidegreeSpace, ExteriorSpace
from refkato.fields import harmonic_residual, kato_ratios, sweep_ratio

GOOD = """
# comment line
a | hodge | n=3; potential=x1*x2 | sqrt(2/3) | box=1; grid=5
b | holomorphic | n=2; p=1; c[1]=z1*z2 | 1/sqrt(2) | attain=1,0,0,0; constant=1
c | kahler | n=2; p=1; q=1; c[1;2]=z1*zb2 | 0.5  # trailing comment
d | control | n=2; k=1; c[1]=x1 | 0.5 |
"""


@pytest.fixture(scope="module")
def catalog():
    return load_catalog()


def test_parse_good_text():
    # line c has only four columns
    with pytest.raises(CatalogError, match=r"<catalog>:5: expected 5"):
        parse_catalog(GOOD)
    entries = parse_catalog(GOOD.replace("| 0.5  #", "| 0.5 | #"))
    assert [e.name for e in entries] == ["a", "b", "c", "d"]
    a, b, c, d = entries
    assert a.expected_alpha == pytest.approx(sqrt(2 / 3))
    assert a.build_field().space == ExteriorSpace(3, 1)
    assert b.residual_family == "dbar" and b.constant_ratio
    np.testing.assert_array_equal(b.expected_attainment, [1, 0, 0, 0])
    assert c.build_field().space == BidegreeSpace(2, 1, 1)
    assert d.expected_violation and not a.expected_violation
    assert a.grid().shape == (125, 3)
    assert b.grid(points=3).shape == (82, 4)  # attainment point appended


@pytest.mark.parametrize(
    "line,match",
    [
        ("x | hodge | n=3 | 0.5", "5 '\\|'-separated"),
        (" | hodge | n=3; potential=x1 | 0.5 |", "empty entry name"),
        ("x | riemann | n=3; potential=x1 | 0.5 |", "unknown family"),
        ("x | hodge | n=3; potential=x1 | two | ", "expected alpha"),
        ("x | hodge | n=3; potential=x1 | 1.5 | ", "outside"),
        ("x | hodge | n=3; potential=x1 +* | 0.5 | ", "cannot parse"),
        ("x | hodge | n=3; k=1; c[1,2]=x1 | 0.5 | ", "does not index"),
        ("x | hodge | n=3; k=2; c[2,1]=x1 | 0.5 | ", "increasing"),
        ("x | hodge | n=3; k=1; c[4]=x1 | 0.5 | ", "within"),
        ("x | hodge | n=3; k=1 | 0.5 | ", "no coefficients"),
        ("x | hodge | n=3; k=1; c[1=x1 | 0.5 | ", "malformed"),
        ("x | hodge | n=3; k=1; c(1)=x1 | 0.5 | ", "unknown parameter"),
        ("x | hodge | potential=x1 | 0.5 | ", "missing parameter 'n'"),
        ("x | hodge | n=three; potential=x1 | 0.5 | ", "integer"),
        ("x | hodge | n=3; n=4; potential=x1 | 0.5 | ", "duplicate key"),
        ("x | hodge | n=3; potential=x1 | 0.5 | box", "key=value"),
        ("x | hodge | n=3; potential=w | 0.5 | ", "unknown symbols"),
        ("x | kahler | n=2; p=1; q=1; c[1]=z1 | 0.5 | ", "does not index"),
    ],
)
def test_parse_errors_carry_line_numbers(line, match):
    text = "# header\n\n" + line + "\n"
    with pytest.raises(CatalogError, match=match) as info:
        parse_catalog(text, source="cat.txt")
    assert info.value.lineno == 3
    assert str(info.value).startswith("cat.txt:3: ")


def test_duplicate_names_rejected():
    text = "a | hodge | n=2; potential=x1*x2 | 0.5 |\na | hodge | n=2; potential=x1 | 0.5 |\n"
    with pytest.raises(CatalogError, match="duplicate entry name") as info:
        parse_catalog(text)
    assert info.value.lineno == 2


def test_missing_file():
    with pytest.raises(FileNotFoundError):
        load_catalog("/nonexistent/catalog.txt")


def test_default_catalog_contents(catalog):
    assert default_catalog_path().is_file()
    names = [e.name for e in catalog]
    assert len(names) == len(set(names))
    assert {e.family for e in catalog} == set(FAMILIES)
    assert sum(e.expected_violation for e in catalog) == 1


def test_default_catalog_entries_are_harmonic(catalog):
    for e in catalog:
        f = e.build_field()
        r = harmonic_residual(f, e.grid(points=min(int(e.domain.get("grid", 21)), 7)), e.residual_family)
        if e.expected_violation:
            assert r > 0.1, e.name
        else:
            assert r < 1e-10, e.name


def test_default_catalog_classical_and_refined_bounds(catalog):
    for e in catalog:
        f = e.build_field()
        grid = e.grid(points=min(int(e.domain.get("grid", 21)), 7))
        r = kato_ratios(f, grid)
        assert np.nanmax(r, initial=0.0) <= 1 + 1e-12, e.name
        res = sweep_ratio(f, grid, e.expected_alpha)
        assert res.passed != e.expected_violation, e.name


def test_star_entries_change_degree(catalog):
    by_name = {e.name: e for e in catalog}
    assert by_name["star_quad3"].build_field().space == ExteriorSpace(3, 2)
    assert by_name["quad3"].build_field().space == ExteriorSpace(3, 1)
