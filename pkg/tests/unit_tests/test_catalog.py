"""Tests for inequality references and catalog plugins."""

import json

import pytest

from multibell import catalog
from multibell import inequality as ineq
from multibell.command_errors import InputError
from multibell.hookspecs import hookimpl


def _flipped_chsh(param):
    return ineq.InequalityTable("chsh3", (0, 0), (0, 0), ((1, 1), (1, -1)), 2)


class ExtraCatalog:
    @hookimpl
    def multibell_inequalities(self):
        return {"chsh3": _flipped_chsh}


class CollidingCatalog:
    @hookimpl
    def multibell_inequalities(self):
        return {"chsh": lambda param: ineq.catalog_chsh()}


@pytest.fixture
def plugin():
    """Register a plugin object on the shared plugin manager for one test."""
    pm = catalog.get_plugin_manager()
    registered = []

    def register(obj):
        pm.register(obj)
        registered.append(obj)

    yield register
    for obj in registered:
        pm.unregister(obj)


@pytest.mark.parametrize(
    "ref, name, n",
    [
        ("chsh", "chsh", 2),
        ("CHSH", "chsh", 2),
        (" i3322 ", "i3322", 3),
        ("as1", "as1", 4),
        ("as2", "as2", 4),
        ("chained:5", "chained:5", 5),
    ],
)
def test_resolve_builtin(ref, name, n):
    table = catalog.resolve_inequality(ref)
    assert table.name == name
    assert table.n_settings == n


def test_unknown_reference_lists_known_names():
    with pytest.raises(InputError, match="as1, as2, chained, chsh, i3322"):
        catalog.resolve_inequality("i4422")


@pytest.mark.parametrize("ref", ["chsh:3", "chained", "chained:abc", "chained:1", "chained:17"])
def test_bad_parameters(ref):
    with pytest.raises(InputError):
        catalog.resolve_inequality(ref)


def test_resolve_json_file(tmp_path):
    path = tmp_path / "custom.json"
    path.write_text(json.dumps(ineq.catalog_as2().to_dict()))
    assert catalog.resolve_inequality(path) == ineq.catalog_as2()


def test_resolve_missing_json_file(tmp_path):
    with pytest.raises(InputError, match="File not found"):
        catalog.resolve_inequality(tmp_path / "missing.json")


def test_plugin_adds_inequality(plugin):
    plugin(ExtraCatalog())
    table = catalog.resolve_inequality("chsh3")
    assert table.name == "chsh3"
    assert "chsh3" in catalog.catalog_factories()


def test_plugin_is_gone_after_unregister():
    with pytest.raises(InputError):
        catalog.resolve_inequality("chsh3")


def test_plugin_name_collision(plugin):
    plugin(CollidingCatalog())
    with pytest.raises(InputError, match="registered more than once"):
        catalog.resolve_inequality("chsh")


def test_catalog_listing_is_verified():
    rows = catalog.catalog_listing()
    assert [row["name"] for row in rows] == list(catalog.LISTED_REFERENCES)
    assert all(row["verified"] for row in rows)
    assert rows[-1] == {
        "name": "chained:6",
        "n": 6,
        "local_bound": 10.0,
        "bruteforce_bound": 10.0,
        "verified": True,
    }
