"""Hook specifications for inequality catalog plugins."""

import pluggy


hookspec = pluggy.HookspecMarker("multibell")
hookimpl = pluggy.HookimplMarker("multibell")


@hookspec
def multibell_inequalities():
    """Contribute inequalities to the catalog.

    Returns:
        dict mapping a catalog name to a factory. The factory takes the reference
        parameter (the part after ':' in 'name:param', or None) and returns an
        InequalityTable.
    """
