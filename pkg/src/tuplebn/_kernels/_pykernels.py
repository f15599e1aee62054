"""Pure-python (numpy) kernels; the fallback when the compiled twin is absent.

Both implementations must produce bit-identical outputs: they consume the
same pre-generated uniforms and the same cumulative CPT arrays, and the
inverse-CDF rule is "number of cumulative entries <= u, clamped to d-1".
"""

import numpy as np


def sample_node(u, rows, jcol, pcols, pstrides, cum):
    """Fill column ``jcol`` of ``rows`` by inverse-CDF lookup per row.

    u: (l,) uniforms for this node; cum: (n_configs, d) cumulative CPT;
    pcols/pstrides: 0-based parent columns and their mixed-radix strides.
    """
    if len(pcols):
        cfg = rows[:, pcols] @ pstrides
    else:
        cfg = np.zeros(rows.shape[0], dtype=np.int64)
    cumrows = cum[cfg]
    d = cum.shape[1]
    vals = (cumrows[:, : d - 1] <= u[:, None]).sum(axis=1)
    rows[:, jcol] = vals


def count_tuples(rows, cols, strides, size):
    """Dense occurrence counts of the value combinations at ``cols``.

    Returns int64[size] where index = sum(rows[:, cols] * strides).
    """
    codes = rows[:, cols] @ strides
    return np.bincount(codes, minlength=size).astype(np.int64)
