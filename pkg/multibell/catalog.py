"""Built-in inequality catalog, and lookup of inequality references.

Other packages can add inequalities by implementing the multibell_inequalities hook and
registering the module under the 'multibell' entry-point group.
"""

import functools
import sys

import pluggy

from . import hookspecs
from . import inequality as ineq
from .command_errors import InputError
from .hookspecs import hookimpl
from .utils import read_json


def _no_param(factory, name):
    def build(param):
        if param is not None:
            raise InputError(f"Inequality {name!r} takes no parameter; got {name}:{param}.")
        return factory()

    return build


def _chained(param):
    if param is None:
        raise InputError("Chained inequality needs a number of settings, e.g. chained:4.")
    try:
        n = int(param)
    except ValueError:
        raise InputError(f"Could not read a number of settings from chained:{param}.")
    if n > ineq.MAX_BRUTEFORCE_SETTINGS:
        raise InputError(
            f"chained:{n} is above the brute-force limit of "
            f"{ineq.MAX_BRUTEFORCE_SETTINGS} settings per side."
        )
    return ineq.catalog_chained(n)


@hookimpl
def multibell_inequalities():
    """Inequalities measured in the multi-setting experiment."""
    return {
        "chsh": _no_param(ineq.catalog_chsh, "chsh"),
        "i3322": _no_param(ineq.catalog_i3322, "i3322"),
        "as1": _no_param(ineq.catalog_as1, "as1"),
        "as2": _no_param(ineq.catalog_as2, "as2"),
        "chained": _chained,
    }


@functools.lru_cache(maxsize=None)
def get_plugin_manager():
    """Plugin manager with the built-in catalog and any installed catalog plugins."""
    pm = pluggy.PluginManager("multibell")
    pm.add_hookspecs(hookspecs)
    pm.register(sys.modules[__name__], name="multibell.catalog")
    pm.load_setuptools_entrypoints("multibell")
    return pm


def catalog_factories():
    """Merge the factories contributed by all plugins.

    Raises:
        InputError: If two plugins register the same name.
    """
    factories = {}
    for contribution in get_plugin_manager().hook.multibell_inequalities():
        for name, factory in contribution.items():
            if name in factories:
                raise InputError(f"Inequality name {name!r} is registered more than once.")
            factories[name] = factory
    return factories


def resolve_inequality(ref):
    """Build the table for a reference such as 'chsh', 'chained:4', or 'my_table.json'."""
    ref = str(ref).strip()
    if ref.lower().endswith(".json"):
        return ineq.InequalityTable.from_dict(read_json(ref))

    name, _, param = ref.lower().partition(":")
    factories = catalog_factories()
    if name not in factories:
        known = ", ".join(sorted(factories))
        raise InputError(f"Unknown inequality {ref!r}. Known inequalities: {known}.")
    return factories[name](param or None)


# References listed by `multibell catalog`.
LISTED_REFERENCES = (
    "chsh",
    "i3322",
    "as1",
    "as2",
    "chained:2",
    "chained:3",
    "chained:4",
    "chained:5",
    "chained:6",
)


def catalog_listing(refs=LISTED_REFERENCES):
    """Rows describing each listed inequality, with its brute-force-verified bound."""
    rows = []
    for ref in refs:
        table = resolve_inequality(ref)
        bruteforce = ineq.local_bound_bruteforce(table)
        rows.append(
            {
                "name": table.name,
                "n": table.n_settings,
                "local_bound": table.local_bound,
                "bruteforce_bound": bruteforce,
                "verified": bruteforce == table.local_bound,
            }
        )
    return rows
