"""Construction of the pixel similarity network and its initial node state.

Two modes: the compact construction (192 feature-space neighbors plus the
8 spatially adjacent pixels, edges between differently-labeled nodes
filtered out, domination seeded from nearby scribbles) and the legacy
construction (200 feature-space neighbors, nothing else).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .features import FeatureMatrix, FeatureMode
from .imgio import UNLABELED

K_PROPOSED = 192
K_REFERENCE = 200
N_SPATIAL = 8

# Domination increments for unlabeled pixels near a scribble: Chebyshev
# grid distance 1 and 2 (the inner and outer ring of the 5x5 window).
INFLUENCE_NEAR = 0.2
INFLUENCE_FAR = 0.1

_DIRECT_KNN_LIMIT = 512
_CHUNK_ROWS = 256


@dataclass
class Network:
    """Undirected, unweighted graph over retained pixels (CSR adjacency).

    ``indices[indptr[i]:indptr[i+1]]`` are the sorted neighbors of node i.
    No self-loops, no duplicate edges; adjacency is symmetric.
    """

    indptr: np.ndarray
    indices: np.ndarray
    coords: np.ndarray
    node_label: np.ndarray
    num_classes: int

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    @property
    def edge_count(self) -> int:
        return len(self.indices) // 2

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i] : self.indptr[i + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def dump_edge_list(self, path: str | Path) -> None:
        """Write one 'i j' pair per undirected edge (i < j), for debugging."""
        src = np.repeat(np.arange(self.n), np.diff(self.indptr))
        keep = src < self.indices
        pairs = np.stack([src[keep], self.indices[keep]], axis=1)
        with open(path, "w", encoding="utf-8") as fh:
            for i, j in pairs:
                fh.write(f"{i} {j}\n")


def _knn_candidates(x: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """(source, neighbor) pairs linking each row to its k nearest rows.

    Nearness is Euclidean distance; ties at the k-th distance are broken
    by the lowest node index. Small inputs use direct squared differences;
    larger ones use the expanded inner-product form in row chunks.
    """
    n = x.shape[0]
    use_direct = n <= _DIRECT_KNN_LIMIT
    sq_norms = None if use_direct else np.einsum("ij,ij->i", x, x)
    src_parts: list[np.ndarray] = []
    dst_parts: list[np.ndarray] = []
    for start in range(0, n, _CHUNK_ROWS):
        stop = min(start + _CHUNK_ROWS, n)
        rows = stop - start
        if use_direct:
            diff = x[start:stop, None, :] - x[None, :, :]
            dist = np.einsum("ijk,ijk->ij", diff, diff)
        else:
            dist = sq_norms[start:stop, None] + sq_norms[None, :] - 2.0 * (x[start:stop] @ x.T)
            np.maximum(dist, 0.0, out=dist)
        dist[np.arange(rows), np.arange(start, stop)] = np.inf
        part = np.argpartition(dist, k - 1, axis=1)[:, :k]
        cutoff = dist[np.arange(rows)[:, None], part].max(axis=1)

        below = dist < cutoff[:, None]
        r_lt, c_lt = np.nonzero(below)
        # Fill the remainder from boundary ties, lowest column index first
        # (np.nonzero yields ascending columns within each row).
        need = k - below.sum(axis=1)
        at_cut = dist == cutoff[:, None]
        r_eq, c_eq = np.nonzero(at_cut)
        counts = at_cut.sum(axis=1)
        row_starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
        rank = np.arange(len(r_eq)) - row_starts[r_eq]
        keep = rank < need[r_eq]
        src_parts.append(np.concatenate([r_lt, r_eq[keep]]) + start)
        dst_parts.append(np.concatenate([c_lt, c_eq[keep]]))
    return np.concatenate(src_parts), np.concatenate(dst_parts)


def _filter_conflicts(src: np.ndarray, dst: np.ndarray, node_label: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    li, lj = node_label[src], node_label[dst]
    keep = (li == UNLABELED) | (lj == UNLABELED) | (li == lj)
    return src[keep], dst[keep]


def _unique_pairs(src: np.ndarray, dst: np.ndarray, n: int) -> np.ndarray:
    lo = np.minimum(src, dst).astype(np.int64)
    hi = np.maximum(src, dst).astype(np.int64)
    keys = np.unique(lo * n + hi)
    return np.stack([keys // n, keys % n], axis=1)


def knn_edges(
    features: FeatureMatrix,
    k: int,
    node_label: np.ndarray | None = None,
    conflict_filter: bool = False,
) -> np.ndarray:
    """Undirected edges {i, j} where j is among i's k nearest or vice versa.

    With ``conflict_filter``, candidate edges between nodes carrying two
    distinct labels are discarded (not replaced by farther neighbors).
    Returns unique (i, j) pairs with i < j.
    """
    n = features.n
    if k <= 0:
        raise ValueError("k must be positive")
    if k >= n:
        raise ValueError(f"k ({k}) must be smaller than the node count ({n})")
    src, dst = _knn_candidates(features.values, k)
    if conflict_filter:
        if node_label is None:
            raise ValueError("conflict filtering requires node labels")
        src, dst = _filter_conflicts(src, dst, node_label)
    return _unique_pairs(src, dst, n)


def spatial_edges(
    width: int,
    height: int,
    node_label: np.ndarray | None = None,
    conflict_filter: bool = False,
) -> np.ndarray:
    """Edges between all 8-adjacent pixel pairs of a width x height grid."""
    idx = np.arange(width * height, dtype=np.int64).reshape(height, width)
    pairs = []
    # Right, down, down-right and down-left cover each adjacency once.
    pairs.append((idx[:, :-1].ravel(), idx[:, 1:].ravel()))
    pairs.append((idx[:-1, :].ravel(), idx[1:, :].ravel()))
    pairs.append((idx[:-1, :-1].ravel(), idx[1:, 1:].ravel()))
    pairs.append((idx[:-1, 1:].ravel(), idx[1:, :-1].ravel()))
    src = np.concatenate([p[0] for p in pairs])
    dst = np.concatenate([p[1] for p in pairs])
    if conflict_filter:
        if node_label is None:
            raise ValueError("conflict filtering requires node labels")
        src, dst = _filter_conflicts(src, dst, node_label)
    return _unique_pairs(src, dst, width * height)


def _pairs_to_csr(pairs: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    src = np.concatenate([pairs[:, 0], pairs[:, 1]])
    dst = np.concatenate([pairs[:, 1], pairs[:, 0]])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    counts = np.bincount(src, minlength=n)
    indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    return indptr, dst.astype(np.int32)


def build_network(
    features: FeatureMatrix,
    coords: np.ndarray,
    node_label: np.ndarray,
    mode: FeatureMode,
    num_classes: int | None = None,
) -> Network:
    """Assemble the full network for one image in the given mode.

    The compact mode unions 192 feature-space neighbors with the 8-pixel
    spatial neighborhood and drops edges between conflicting labels; the
    legacy mode uses 200 feature-space neighbors only.
    """
    n = features.n
    coords = np.ascontiguousarray(coords, dtype=np.int32)
    node_label = np.ascontiguousarray(node_label, dtype=np.int16)
    if coords.shape != (n, 2) or node_label.shape != (n,):
        raise ValueError("coords/node_label sizes do not match the feature matrix")
    if not features.normalized:
        raise ValueError("features must be z-normalized before building the network")
    if num_classes is None:
        num_classes = int(node_label.max()) + 1 if (node_label >= 0).any() else 0

    if mode == FeatureMode.PROPOSED:
        k = K_PROPOSED
        if n <= k:
            raise ValueError(
                f"network needs more than {k} nodes, got {n}; "
                "increase max_pixels or use a larger image"
            )
        height = int(coords[:, 0].max()) + 1
        width = int(coords[:, 1].max()) + 1
        if width * height != n:
            raise ValueError("coords do not form a full raster grid")
        feat_pairs = knn_edges(features, k, node_label, conflict_filter=True)
        spat_pairs = spatial_edges(width, height, node_label, conflict_filter=True)
        pairs = np.unique(np.concatenate([feat_pairs, spat_pairs], axis=0), axis=0)
    elif mode == FeatureMode.REFERENCE:
        k = K_REFERENCE
        if n <= k:
            raise ValueError(
                f"network needs more than {k} nodes, got {n}; "
                "increase max_pixels or use a larger image"
            )
        pairs = knn_edges(features, k, conflict_filter=False)
    else:
        raise ValueError(f"unknown mode: {mode!r}")

    indptr, indices = _pairs_to_csr(pairs, n)
    return Network(indptr=indptr, indices=indices, coords=coords, node_label=node_label, num_classes=num_classes)


def initial_state(net: Network) -> np.ndarray:
    """Base domination matrix: labeled rows one-hot, unlabeled rows uniform."""
    c = net.num_classes
    if c < 2:
        raise ValueError("need at least two classes")
    state = np.full((net.n, c), 1.0 / c, dtype=np.float64)
    labeled = net.node_label >= 0
    state[labeled] = 0.0
    state[labeled, net.node_label[labeled].astype(np.int64)] = 1.0
    return state


def seed_influence(net: Network) -> np.ndarray:
    """Initial domination with nearby-scribble influence applied.

    Starting from the base initialization, each labeled pixel raises its
    class's domination on unlabeled pixels within its 5x5 grid window:
    +0.2 at Chebyshev distance 1, +0.1 at distance 2, clamped at 1, with
    the other classes rescaled to keep the row summing to one. Labeled
    pixels are processed in raster order; labeled rows are never touched.
    """
    c = net.num_classes
    for cls in range(c):
        if not (net.node_label == cls).any():
            raise ValueError(f"class {cls} has no labeled node")
    state = initial_state(net)

    height = int(net.coords[:, 0].max()) + 1
    width = int(net.coords[:, 1].max()) + 1
    grid = np.full((height, width), -1, dtype=np.int64)
    grid[net.coords[:, 0], net.coords[:, 1]] = np.arange(net.n)

    labeled_idx = np.flatnonzero(net.node_label >= 0)
    raster = np.lexsort((net.coords[labeled_idx, 1], net.coords[labeled_idx, 0]))
    for p in labeled_idx[raster]:
        cls = int(net.node_label[p])
        r0, c0 = int(net.coords[p, 0]), int(net.coords[p, 1])
        for dr in range(-2, 3):
            rr = r0 + dr
            if rr < 0 or rr >= height:
                continue
            for dc in range(-2, 3):
                cc = c0 + dc
                if cc < 0 or cc >= width:
                    continue
                cheb = max(abs(dr), abs(dc))
                if cheb == 0:
                    continue
                q = grid[rr, cc]
                if q < 0 or net.node_label[q] != UNLABELED:
                    continue
                delta = INFLUENCE_NEAR if cheb == 1 else INFLUENCE_FAR
                row = state[q]
                old = row[cls]
                new = min(1.0, old + delta)
                others = row.sum() - old
                if others <= 0.0:
                    continue
                scale = (1.0 - new) / others
                row *= scale
                row[cls] = new
    return state
