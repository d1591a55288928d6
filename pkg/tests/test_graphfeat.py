import unittest

import numpy as np
import numpy.testing as npt

from retina.constants import GSP_NAMES, LGS_NAMES
from retina.errors import GraphError, InputError
from retina.graphfeat import (
    GspConfig,
    LgsConfig,
    PixelGraph,
    build_block_graph,
    edge_weight,
    endpoints,
    graph_features,
    gsp_features,
    gsp_path_means,
    lgs_codes,
    lgs_features,
    lgs_transform,
    path_cost,
    path_overlay,
    shortest_path,
    split_blocks,
)

HORIZONTAL = [((0, 0), (0, -1)), ((0, -1), (1, -1)), ((1, -1), (0, -2)),
              ((0, 0), (0, 1)), ((0, 1), (1, 1)), ((1, 1), (0, 2))]
VERTICAL = [((0, 0), (-1, 0)), ((-1, 0), (-1, -1)), ((-1, -1), (-2, 0)),
            ((0, 0), (1, 0)), ((1, 0), (1, -1)), ((1, -1), (2, 0))]


def brute_codes(img):
    rows, cols = img.shape

    def at(r, c):
        return img[min(max(r, 0), rows - 1), min(max(c, 0), cols - 1)]

    out = []
    for edges in (HORIZONTAL, VERTICAL):
        codes = np.zeros(img.shape, dtype=np.int64)
        for r in range(rows):
            for c in range(cols):
                for p, (a, b) in enumerate(edges):
                    if not at(r + a[0], c + a[1]) > at(r + b[0], c + b[1]):
                        codes[r, c] += 2 ** p
        out.append(codes)
    return out


def brute_min_cost(block, s, d, bound=np.inf):
    """Cheapest simple king-move path below bound, by depth-first enumeration"""
    rows, cols = block.shape
    best = [bound]

    def walk(r, c, cost, seen):
        if cost >= best[0]:
            return
        if (r, c) == d:
            best[0] = cost
            return
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                nr, nc = r + dr, c + dc
                if (dr or dc) and 0 <= nr < rows and 0 <= nc < cols and (nr, nc) not in seen:
                    seen.add((nr, nc))
                    walk(nr, nc, cost + edge_weight(block[r, c], block[nr, nc]), seen)
                    seen.remove((nr, nc))

    walk(s[0], s[1], 0.0, {s})
    return best[0]


class TestLgs(unittest.TestCase):
    def test_codes_match_brute_force(self):
        rng = np.random.default_rng(50)
        for _ in range(50):
            img = rng.integers(0, 4, size=(8, 8)).astype(np.float64)
            expected_lr, expected_tb = brute_codes(img)
            lr, tb = lgs_codes(img)
            npt.assert_array_equal(lr, expected_lr)
            npt.assert_array_equal(tb, expected_tb)
            npt.assert_array_equal(lgs_transform(img), np.hypot(expected_lr, expected_tb))

    def test_constant_image_sets_every_bit(self):
        out = lgs_transform(np.full((8, 8), 9.0))
        npt.assert_allclose(out, np.full((8, 8), np.sqrt(2.0) * 63), rtol=1e-12)
        self.assertEqual(LgsConfig().max_value, np.sqrt(2.0) * 63)

    def test_strict_decrease_clears_bit(self):
        img = np.full((5, 5), 1.0)
        img[2, 2] = 5.0
        lr, tb = lgs_codes(img)
        # Centre brighter than both first neighbours: bits p0 and p3 are 0
        self.assertEqual(lr[2, 2], 63 - 1 - 8)
        self.assertEqual(tb[2, 2], 63 - 1 - 8)

    def test_small_image(self):
        with self.assertRaises(InputError):
            lgs_codes(np.zeros((4, 8)))

    def test_features_of_constant_raster(self):
        f = lgs_features(np.full((6, 6), LgsConfig().max_value))
        self.assertAlmostEqual(f["Mean_LGS"], np.sqrt(2.0) * 63)
        self.assertEqual(f["Variance_LGS"], 0.0)
        self.assertEqual(f["Skewness_LGS"], 0.0)
        self.assertEqual(f["Kurtosis_LGS"], 0.0)
        self.assertAlmostEqual(f["Energy_LGS"], 1.0)
        self.assertEqual(f["Entropy_LGS"], 0.0)

    def test_unequal_patterns(self):
        with self.assertRaises(InputError):
            LgsConfig(horizontal=(((0, 0), (0, 1)),), vertical=())

    def test_adding_a_constant_keeps_codes(self):
        img = np.random.default_rng(14).integers(0, 200, size=(12, 12)).astype(np.float64)
        npt.assert_array_equal(lgs_transform(img + 55.0), lgs_transform(img))


class TestPixelGraph(unittest.TestCase):
    def test_degrees(self):
        g = build_block_graph(np.zeros((4, 4)), t_e=1)
        self.assertEqual(g.degree(g.vertex(1, 1)), 8)
        self.assertEqual(g.degree(g.vertex(0, 0)), 3)
        self.assertEqual(g.degree(g.vertex(0, 2)), 5)
        g2 = build_block_graph(np.zeros((5, 5)), t_e=2)
        self.assertEqual(g2.degree(g2.vertex(2, 2)), 16)

    def test_edge_weight(self):
        self.assertEqual(edge_weight(10.0, 4.0), 6.0 + 7.0)
        g = build_block_graph(np.array([[10.0, 4.0]]))
        self.assertEqual(g.weight(0, 1), 13.0)
        self.assertEqual(g.weight(1, 0), 13.0)

    def test_dijkstra_matches_exhaustive_search(self):
        rng = np.random.default_rng(100)
        for _ in range(100):
            block = rng.integers(0, 256, size=(4, 4)).astype(np.float64)
            g = build_block_graph(block)
            for direction in (0, 45, 90, 135):
                s, d = endpoints(block.shape, direction)
                path = shortest_path(g, g.vertex(*s), g.vertex(*d))
                cost = path_cost(g, path)
                self.assertEqual(path[0], g.vertex(*s))
                self.assertEqual(path[-1], g.vertex(*d))
                # Any path at least as cheap lies strictly below cost + 1
                self.assertEqual(brute_min_cost(block, s, d, bound=cost + 1.0), cost)

    def test_source_equals_destination(self):
        g = build_block_graph(np.ones((3, 3)))
        self.assertEqual(shortest_path(g, 4, 4), [4])

    def test_ties_prefer_smaller_predecessor(self):
        g = build_block_graph(np.zeros((3, 3)))
        # Every edge costs 0, so the first settled neighbours win
        self.assertEqual(shortest_path(g, 0, 8), [0, 4, 8])

    def test_unreachable_vertex(self):
        g = PixelGraph(shape=(1, 3), intensities=np.zeros(3), t_e=1,
                       adjacency=[[(1, 1.0)], [(0, 1.0)], []])
        with self.assertRaises(GraphError):
            shortest_path(g, 0, 2)
        with self.assertRaises(InputError):
            shortest_path(g, 0, 7)


class TestGsp(unittest.TestCase):
    def test_blocks_cover_image(self):
        img = np.arange(70.0).reshape(7, 10)
        blocks = split_blocks(img, (2, 3))
        self.assertEqual(len(blocks), 6)
        self.assertEqual(sum(b.size for b in blocks), img.size)
        self.assertEqual(blocks[-1].shape, (4, 4))

    def test_endpoints(self):
        self.assertEqual(endpoints((4, 6), 0), ((2, 0), (2, 5)))
        self.assertEqual(endpoints((4, 6), 45), ((3, 0), (0, 5)))
        self.assertEqual(endpoints((4, 6), 90), ((0, 3), (3, 3)))
        self.assertEqual(endpoints((4, 6), 135), ((0, 0), (3, 5)))
        with self.assertRaises(InputError):
            endpoints((4, 6), 30)

    def test_constant_image_vector(self):
        f = gsp_features(np.full((32, 32), 40.0))
        self.assertEqual(list(f), GSP_NAMES)
        for name, value in f.items():
            if name.endswith(("Kurtosis", "Skewness", "SD")):
                self.assertEqual(value, 0.0, name)
            else:
                self.assertEqual(value, 40.0, name)

    def test_path_means_one_per_block(self):
        img = np.random.default_rng(3).integers(0, 256, size=(24, 24))
        means = gsp_path_means(img, GspConfig(n_blocks=(3, 2)))
        self.assertEqual(sorted(means), [0, 45, 90, 135])
        self.assertTrue(all(len(v) == 6 for v in means.values()))

    def test_config_validation(self):
        with self.assertRaises(InputError):
            GspConfig(n_blocks=(1, 1))
        with self.assertRaises(InputError):
            GspConfig(t_e=0)

    def test_overlay_marks_paths(self):
        img = np.full((16, 16), 100, dtype=np.uint8)
        overlay = path_overlay(img, GspConfig(n_blocks=(2, 2)))
        self.assertEqual(overlay.dtype, np.uint8)
        self.assertEqual(set(np.unique(overlay)), {50, 255})

    def test_graph_feature_block(self):
        f = graph_features(np.random.default_rng(4).integers(0, 256, size=(32, 32)))
        self.assertEqual(list(f), LGS_NAMES + GSP_NAMES)
        self.assertTrue(all(np.isfinite(v) for v in f.values()))

    def test_bright_block_sets_the_maximum(self):
        img = np.full((16, 16), 40.0)
        img[:8, 8:] = 200.0
        f = gsp_features(img, GspConfig(n_blocks=(2, 2)))
        for direction in (0, 45, 90, 135):
            self.assertEqual(f[f"GSP{direction}_Q100"], 200.0)
            self.assertEqual(f[f"GSP{direction}_Q50"], 40.0)
            self.assertEqual(f[f"GSP{direction}_Q25"], 40.0)
            self.assertGreater(f[f"GSP{direction}_SD"], 0.0)


if __name__ == "__main__":
    unittest.main()
