"""Graph-based texture features: symmetric local graph structure and
block-wise graph shortest paths.

LGS bit layout (offsets are (row, col) from the centre pixel C; each edge
a -> b emits bit 0 when I(a) > I(b), otherwise 1)::

    left   p0: C -> (0,-1)   p1: (0,-1) -> (1,-1)   p2: (1,-1) -> (0,-2)
    right  p3: C -> (0,1)    p4: (0,1) -> (1,1)     p5: (1,1) -> (0,2)
    top    p0: C -> (-1,0)   p1: (-1,0) -> (-1,-1)  p2: (-1,-1) -> (-2,0)
    bottom p3: C -> (1,0)    p4: (1,0) -> (1,-1)    p5: (1,-1) -> (2,0)

NRP_LR collects the left/right bits, NRP_TB the top/bottom bits, and the
final value is their Euclidean magnitude.
"""
import heapq
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from retina.constants import GSP_DIRECTIONS, GSP_NAMES, GSP_STATS, LGS_NAMES
from retina.errors import GraphError, InputError
from retina.statfeat import is_flat

logger = logging.getLogger(__name__)

CENTER = (0, 0)
LEFT_EDGES = ((CENTER, (0, -1)), ((0, -1), (1, -1)), ((1, -1), (0, -2)))
RIGHT_EDGES = ((CENTER, (0, 1)), ((0, 1), (1, 1)), ((1, 1), (0, 2)))
TOP_EDGES = ((CENTER, (-1, 0)), ((-1, 0), (-1, -1)), ((-1, -1), (-2, 0)))
BOTTOM_EDGES = ((CENTER, (1, 0)), ((1, 0), (1, -1)), ((1, -1), (2, 0)))

LGS_RADIUS = 2


@dataclass(frozen=True)
class LgsConfig:
    """Edge order of the horizontal and vertical patterns"""
    horizontal: tuple = LEFT_EDGES + RIGHT_EDGES
    vertical: tuple = TOP_EDGES + BOTTOM_EDGES

    def __post_init__(self):
        if len(self.horizontal) != len(self.vertical):
            raise InputError("horizontal and vertical LGS patterns need equal bit counts")

    @property
    def bits(self):
        return len(self.horizontal)

    @property
    def max_value(self):
        return float(np.sqrt(2.0) * (2 ** self.bits - 1))


def _pattern(padded, shape, edges):
    rows, cols = shape

    def view(offset):
        dr, dc = offset
        return padded[LGS_RADIUS + dr:LGS_RADIUS + dr + rows, LGS_RADIUS + dc:LGS_RADIUS + dc + cols]

    code = np.zeros(shape, dtype=np.int64)
    for p, (a, b) in enumerate(edges):
        # Strictly higher to lower gives 0, everything else 1
        bit = ~(view(a) > view(b))
        code += bit.astype(np.int64) << p
    return code


def lgs_codes(img, cfg=None):
    """NRP_LR and NRP_TB code rasters"""
    cfg = cfg or LgsConfig()
    x = np.asarray(img, dtype=np.float64)
    if x.ndim != 2 or min(x.shape) < 2 * LGS_RADIUS + 1:
        raise InputError(f"LGS needs an image of at least 5x5, got {x.shape}")
    padded = np.pad(x, LGS_RADIUS, mode="edge")
    return _pattern(padded, x.shape, cfg.horizontal), _pattern(padded, x.shape, cfg.vertical)


def lgs_transform(img, cfg=None):
    nrp_lr, nrp_tb = lgs_codes(img, cfg)
    return np.hypot(nrp_lr, nrp_tb)


def lgs_features(lgs, cfg=None):
    """Mean, variance, skewness, kurtosis, energy and entropy of an NRP raster"""
    cfg = cfg or LgsConfig()
    x = np.asarray(lgs, dtype=np.float64).ravel()
    if x.size == 0:
        raise InputError("empty input")
    normalized = x / cfg.max_value
    flat = is_flat(x)
    counts, _ = np.histogram(normalized, bins=256, range=(0.0, 1.0))
    return {
        "Mean_LGS": float(x.mean()),
        "Variance_LGS": 0.0 if flat else float(x.var()),
        "Skewness_LGS": 0.0 if flat else float(stats.skew(x, bias=True)),
        "Kurtosis_LGS": 0.0 if flat else float(stats.kurtosis(x, fisher=False, bias=True)),
        "Energy_LGS": float(np.mean(normalized * normalized)),
        "Entropy_LGS": float(stats.entropy(counts, base=2)),
    }


@dataclass
class PixelGraph:
    """Pixels of one block joined where their Chebyshev distance equals t_e"""
    shape: tuple
    intensities: np.ndarray
    t_e: int
    adjacency: list = field(default_factory=list)

    def vertex(self, r, c):
        return r * self.shape[1] + c

    def coords(self, v):
        return divmod(v, self.shape[1])

    def degree(self, v):
        return len(self.adjacency[v])

    def weight(self, u, v):
        for nbr, w in self.adjacency[u]:
            if nbr == v:
                return w
        raise GraphError(f"no edge between {self.coords(u)} and {self.coords(v)}")


def edge_weight(a, b):
    """|I1 - I2| plus the mean intensity of the two pixels"""
    return abs(a - b) + (a + b) / 2.0


def build_block_graph(block, t_e=1):
    x = np.asarray(block, dtype=np.float64)
    if x.ndim != 2 or x.size == 0:
        raise InputError("graph block must be a non-empty 2-D raster")
    rows, cols = x.shape
    offsets = [
        (dr, dc)
        for dr in range(-t_e, t_e + 1)
        for dc in range(-t_e, t_e + 1)
        if max(abs(dr), abs(dc)) == t_e
    ]
    flat = x.ravel()
    adjacency = [[] for _ in range(flat.size)]
    for r in range(rows):
        for c in range(cols):
            u = r * cols + c
            for dr, dc in offsets:
                nr, nc = r + dr, c + dc
                if 0 <= nr < rows and 0 <= nc < cols:
                    v = nr * cols + nc
                    adjacency[u].append((v, edge_weight(flat[u], flat[v])))
    return PixelGraph(shape=x.shape, intensities=flat, t_e=t_e, adjacency=adjacency)


def shortest_path(g, s, d):
    """Dijkstra from s to d; equal-cost ties keep the smaller predecessor"""
    n = len(g.adjacency)
    if not (0 <= s < n and 0 <= d < n):
        raise InputError(f"path endpoints {s}, {d} outside graph of {n} vertices")
    dist = {s: 0.0}
    pred = {s: None}
    done = set()
    heap = [(0.0, s)]
    while heap:
        cost, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u == d:
            break
        for v, w in g.adjacency[u]:
            if v in done:
                continue
            new = cost + w
            if v not in dist or new < dist[v]:
                dist[v] = new
                pred[v] = u
                heapq.heappush(heap, (new, v))
            elif new == dist[v] and u < pred[v]:
                pred[v] = u

    if d not in done:
        raise GraphError(f"vertex {g.coords(d)} unreachable from {g.coords(s)}")
    path = [d]
    while pred[path[-1]] is not None:
        path.append(pred[path[-1]])
    return path[::-1]


def path_cost(g, path):
    return float(sum(g.weight(u, v) for u, v in zip(path, path[1:])))


@dataclass(frozen=True)
class GspConfig:
    """Block grid (rows, cols) and the Chebyshev edge threshold"""
    n_blocks: tuple = (4, 4)
    t_e: int = 1

    def __post_init__(self):
        nb_r, nb_c = self.n_blocks
        if nb_r < 1 or nb_c < 1 or nb_r * nb_c < 2:
            raise InputError(f"feat.gsp_blocks must give at least 2 blocks, got {self.n_blocks}")
        if int(self.t_e) != self.t_e or self.t_e < 1:
            raise InputError(f"feat.gsp_te must be >= 1, got {self.t_e}")


def _cuts(length, parts):
    size = length // parts
    return [i * size for i in range(parts)] + [length]


def split_blocks(img, n_blocks):
    """Tile a raster into a block grid; the last row/column absorbs remainders"""
    x = np.asarray(img)
    nb_r, nb_c = n_blocks
    if x.shape[0] < nb_r or x.shape[1] < nb_c:
        raise InputError(f"image {x.shape} too small for a {nb_r}x{nb_c} block grid")
    row_cuts, col_cuts = _cuts(x.shape[0], nb_r), _cuts(x.shape[1], nb_c)
    return [
        x[row_cuts[i]:row_cuts[i + 1], col_cuts[j]:col_cuts[j + 1]]
        for i in range(nb_r)
        for j in range(nb_c)
    ]


def endpoints(shape, direction):
    """Source and destination pixels of a block for one path direction"""
    rows, cols = shape
    if direction == 0:
        return (rows // 2, 0), (rows // 2, cols - 1)
    if direction == 45:
        return (rows - 1, 0), (0, cols - 1)
    if direction == 90:
        return (0, cols // 2), (rows - 1, cols // 2)
    if direction == 135:
        return (0, 0), (rows - 1, cols - 1)
    raise InputError(f"unsupported path direction {direction}")


def block_paths(block, t_e=1):
    """Shortest path (as (row, col) pixels) per direction through one block"""
    g = build_block_graph(block, t_e)
    paths = {}
    for direction in GSP_DIRECTIONS:
        (sr, sc), (dr, dc) = endpoints(g.shape, direction)
        path = shortest_path(g, g.vertex(sr, sc), g.vertex(dr, dc))
        paths[direction] = [g.coords(v) for v in path]
    return paths


def _direction_stats(values):
    v = np.asarray(values, dtype=np.float64)
    flat = is_flat(v)
    q25, q50, q75, q100 = np.quantile(v, [0.25, 0.5, 0.75, 1.0])
    return {
        "Kurtosis": 0.0 if flat else float(stats.kurtosis(v, fisher=False, bias=True)),
        "Skewness": 0.0 if flat else float(stats.skew(v, bias=True)),
        "SD": 0.0 if flat else float(v.std()),
        "Q25": float(q25),
        "Q50": float(q50),
        "Q75": float(q75),
        "Q100": float(q100),
    }


def gsp_path_means(img, cfg=None):
    """Per-direction vectors of block path mean intensities"""
    cfg = cfg or GspConfig()
    blocks = split_blocks(np.asarray(img, dtype=np.float64), cfg.n_blocks)
    means = {direction: [] for direction in GSP_DIRECTIONS}
    for block in blocks:
        for direction, path in block_paths(block, cfg.t_e).items():
            rr, cc = zip(*path)
            means[direction].append(float(block[list(rr), list(cc)].mean()))
    return {direction: np.asarray(vals) for direction, vals in means.items()}


def gsp_features(img, cfg=None):
    """Kurtosis, skewness, SD and quartiles of the path means in four directions"""
    means = gsp_path_means(img, cfg)
    out = {}
    for direction in GSP_DIRECTIONS:
        block_stats = _direction_stats(means[direction])
        for stat in GSP_STATS:
            out[f"GSP{direction}_{stat}"] = block_stats[stat]
    return out


def path_overlay(img, cfg=None):
    """Dimmed copy of the image with every block path drawn at full intensity"""
    cfg = cfg or GspConfig()
    x = np.asarray(img, dtype=np.float64)
    overlay = (x * 0.5).astype(np.uint8)
    nb_r, nb_c = cfg.n_blocks
    row_cuts, col_cuts = _cuts(x.shape[0], nb_r), _cuts(x.shape[1], nb_c)
    for i in range(nb_r):
        for j in range(nb_c):
            r0, c0 = row_cuts[i], col_cuts[j]
            block = x[r0:row_cuts[i + 1], c0:col_cuts[j + 1]]
            for path in block_paths(block, cfg.t_e).values():
                for r, c in path:
                    overlay[r0 + r, c0 + c] = 255
    return overlay


def graph_features(img, lgs_cfg=None, gsp_cfg=None):
    """LGS and GSP blocks of the feature vector"""
    feats = lgs_features(lgs_transform(img, lgs_cfg), lgs_cfg)
    feats.update(gsp_features(img, gsp_cfg))
    return {name: feats[name] for name in LGS_NAMES + GSP_NAMES}
