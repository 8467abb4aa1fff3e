import logging

import numpy as np

from sgtools.matcher.data import topk_count

logger = logging.getLogger(__name__)


def topk_select(soft_matrix, k_tilde, m_ref=None):
    """Greedy one-to-one selection of the K best interior cells of S~.

    Cells are visited by decreasing value, ties by (row, column); a cell is
    taken when neither its row nor its column is used yet.
    """
    soft_matrix = np.asarray(soft_matrix, dtype=np.float64)
    interior = soft_matrix[:-1, :-1]
    m_src = interior.shape[0]
    if m_ref is None:
        m_ref = interior.shape[1]
    count = topk_count(k_tilde, m_src, m_ref)
    if count == 0:
        return []

    rows, cols = np.indices(interior.shape)
    rows, cols, values = rows.ravel(), cols.ravel(), interior.ravel()
    order = np.lexsort((cols, rows, -values))
    used_rows, used_cols = set(), set()
    selected = []
    for index in order:
        i, j = int(rows[index]), int(cols[index])
        if i in used_rows or j in used_cols:
            continue
        selected.append((i, j, float(values[index])))
        used_rows.add(i)
        used_cols.add(j)
        if len(selected) == count:
            break
    return selected
