"""Selects the kernel backend at import time.

The compiled extension wins when present; set SQCACHED_PURE_PYTHON=1 to
force the fallback (used by the kernel comparison benchmark and tests).
"""

import os

if os.environ.get("SQCACHED_PURE_PYTHON"):
    from .kernel_py import (  # noqa: F401
        BACKEND,
        BTree,
        compare_keys,
        compare_prefix,
        compare_values,
        like_match,
    )
else:
    try:
        from ._ckernel import (  # noqa: F401
            BACKEND,
            BTree,
            compare_keys,
            compare_prefix,
            compare_values,
            like_match,
        )
    except ImportError:
        from .kernel_py import (  # noqa: F401
            BACKEND,
            BTree,
            compare_keys,
            compare_prefix,
            compare_values,
            like_match,
        )
