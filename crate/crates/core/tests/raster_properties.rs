mod common;

use common::grid_dijkstra;
use pcctp_core::raster::{
    aggregate_masks, astar_grid, build_graph, classify, dbscan, detect_pinch_points, ndwi, smooth_path, BandRaster,
    BuildConfig, GridHeader, Label, PinchConfig, ProbWaterMask,
};
use pcctp_core::Execution;
use proptest::prelude::*;

/// Two certain-water blobs joined only by a 3-row channel whose columns
/// carry the given probabilities.
fn two_blobs(channel: &[f64; 6]) -> ProbWaterMask {
    let (w, h) = (50, 24);
    let header = GridHeader::new(w, h, 0.0, 240.0, 10.0).unwrap();
    let mut probs = vec![0.0; w * h];
    for r in 2..22 {
        for c in 2..22 {
            probs[r * w + c] = 1.0;
            probs[r * w + c + 26] = 1.0;
        }
    }
    for r in 11..14 {
        for (i, &p) in channel.iter().enumerate() {
            probs[r * w + 22 + i] = p;
        }
    }
    ProbWaterMask::new(header, probs).unwrap()
}

fn band(w: usize, h: usize, values: Vec<f64>, valid: Option<Vec<bool>>) -> BandRaster {
    BandRaster::new(GridHeader::new(w, h, 0.0, 0.0, 1.0).unwrap(), values, valid).unwrap()
}

/// Union-find over core points, the textbook definition of the clusters.
fn reference_cores(points: &[(f64, f64)], eps: f64, min_pts: usize) -> (Vec<bool>, Vec<usize>) {
    let n = points.len();
    let near = |i: usize, j: usize| (points[i].0 - points[j].0).powi(2) + (points[i].1 - points[j].1).powi(2) <= eps * eps;
    let core: Vec<bool> = (0..n).map(|i| (0..n).filter(|&j| near(i, j)).count() >= min_pts).collect();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for i in 0..n {
        for j in 0..i {
            if core[i] && core[j] && near(i, j) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let roots = (0..n).map(|i| find(&mut parent, i)).collect();
    (core, roots)
}

proptest! {
    #[test]
    fn ndwi_stays_in_unit_range(
        vals in prop::collection::vec((0.0f64..1e4, 0.0f64..1e4), 1..200),
    ) {
        let n = vals.len();
        let green = band(n, 1, vals.iter().map(|v| v.0).collect(), None);
        let nir = band(n, 1, vals.iter().map(|v| v.1).collect(), None);
        let out = ndwi(&green, &nir).unwrap();
        for (i, &(g, r)) in vals.iter().enumerate() {
            if g + r == 0.0 {
                prop_assert!(!out.is_valid(i));
            } else {
                prop_assert!(out.is_valid(i));
                prop_assert!((-1.0..=1.0).contains(&out.values[i]));
            }
        }
    }

    #[test]
    fn aggregate_counts_water_over_valid_images(
        stack in prop::collection::vec(prop::collection::vec((any::<bool>(), prop::bool::weighted(0.9)), 40), 1..8),
    ) {
        let masks: Vec<BandRaster> = stack
            .iter()
            .map(|img| {
                let values = img.iter().map(|&(w, _)| if w { 1.0 } else { 0.0 }).collect();
                band(8, 5, values, Some(img.iter().map(|&(_, v)| v).collect()))
            })
            .collect();
        let agg = aggregate_masks(&masks).unwrap();
        for i in 0..40 {
            let seen = stack.iter().filter(|img| img[i].1).count();
            let water = stack.iter().filter(|img| img[i].1 && img[i].0).count();
            let p = agg.probs[i];
            prop_assert!((0.0..=1.0).contains(&p));
            if seen == 0 {
                prop_assert_eq!(p, 0.0);
            } else {
                prop_assert_eq!(p, water as f64 / seen as f64);
            }
        }
        let once = aggregate_masks(&masks[..1]).unwrap();
        let twice = aggregate_masks(&[masks[0].clone(), masks[0].clone()]).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn astar_agrees_with_dijkstra(seed in any::<u64>(), land in 0.0f64..0.6, w in 2usize..30, h in 2usize..30) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let header = GridHeader::new(w, h, 0.0, 0.0, 2.5).unwrap();
        let probs: Vec<f64> = (0..w * h).map(|_| if rng.random_bool(land) { 0.0 } else { 1.0 }).collect();
        let grid = classify(&ProbWaterMask::new(header, probs).unwrap(), 0.95, 0.05);
        let water: Vec<(usize, usize)> = (0..w * h).map(|i| (i / w, i % w)).filter(|&p| grid.is_water(p)).collect();
        prop_assume!(!water.is_empty());
        for _ in 0..10 {
            let a = water[rng.random_range(0..water.len())];
            let b = water[rng.random_range(0..water.len())];
            let got = astar_grid(&grid, a, b).unwrap();
            let want = grid_dijkstra(w, h, |r, c| grid.is_water((r, c)), a, b)
                .map(|(s, d)| (s as f64 + d as f64 * std::f64::consts::SQRT_2) * header.res);
            prop_assert_eq!(got.as_ref().map(|p| p.length_m), want);
            if let Some(p) = got {
                prop_assert_eq!(p.pixels.first(), Some(&a));
                prop_assert_eq!(p.pixels.last(), Some(&b));
                prop_assert!(p.pixels.iter().all(|&q| grid.is_water(q)));
                prop_assert!(p.pixels.windows(2).all(|s| s[0].0.abs_diff(s[1].0) <= 1 && s[0].1.abs_diff(s[1].1) <= 1));
            }
        }
    }

    #[test]
    fn pinch_block_prob_is_one_minus_weakest_pixel(channel in prop::array::uniform6(0.06f64..0.94)) {
        let mask = two_blobs(&channel);
        let edges = detect_pinch_points(&mask, &PinchConfig::default());
        let weakest = channel.iter().copied().fold(1.0, f64::min);
        prop_assert_eq!(edges.len(), 1);
        prop_assert!((edges[0].block_prob - (1.0 - weakest)).abs() <= 1e-12);
        prop_assert_eq!(edges[0].candidate.min_water_prob, weakest);
    }

    #[test]
    fn graph_build_is_deterministic(channel in prop::array::uniform6(0.06f64..0.94)) {
        let mask = two_blobs(&channel);
        let seq = BuildConfig { exec: Execution::Sequential, ..BuildConfig::default() };
        let par = BuildConfig { exec: Execution::Parallel, ..BuildConfig::default() };
        let a = build_graph(&mask, (105.0, 125.0), &[(375.0, 125.0)], &seq).unwrap();
        let b = build_graph(&mask, (105.0, 125.0), &[(375.0, 125.0)], &par).unwrap();
        prop_assert_eq!(a.graph.to_json(), b.graph.to_json());
        prop_assert_eq!(a.graph.k(), 1);
        let weakest = channel.iter().copied().fold(1.0, f64::min);
        prop_assert!((a.graph.stoch_edge(0).block_prob - (1.0 - weakest)).abs() <= 1e-12);
    }

    #[test]
    fn dbscan_matches_core_point_components(
        points in prop::collection::vec((0.0f64..50.0, 0.0f64..50.0), 0..60),
        eps in 1.0f64..10.0,
        min_pts in 1usize..5,
    ) {
        let labels = dbscan(&points, eps, min_pts);
        let (core, root) = reference_cores(&points, eps, min_pts);
        let near = |i: usize, j: usize| (points[i].0 - points[j].0).powi(2) + (points[i].1 - points[j].1).powi(2) <= eps * eps;
        let id = |l: Label| match l { Label::Cluster(c) => Some(c), Label::Noise => None };
        let mut first_seen = Vec::new();
        for i in 0..points.len() {
            if core[i] {
                let c = id(labels[i]).expect("core point in a cluster");
                if !first_seen.contains(&c) {
                    first_seen.push(c);
                }
                for j in 0..i {
                    if core[j] {
                        prop_assert_eq!(root[i] == root[j], labels[i] == labels[j]);
                    }
                }
            } else {
                let owners: Vec<usize> = (0..points.len()).filter(|&j| core[j] && near(i, j)).map(|j| root[j]).collect();
                match id(labels[i]) {
                    None => prop_assert!(owners.is_empty()),
                    Some(_) => {
                        let j = (0..points.len()).find(|&j| core[j] && labels[j] == labels[i]).unwrap();
                        prop_assert!(owners.contains(&root[j]));
                    }
                }
            }
        }
        prop_assert_eq!(first_seen.clone(), (0..first_seen.len()).collect::<Vec<_>>());
    }

    #[test]
    fn smoothing_keeps_ends_and_order(len in 0usize..80, stride in 0usize..9) {
        let path: Vec<(usize, usize)> = (0..len).map(|i| (i, 2 * i)).collect();
        let out = smooth_path(&path, stride);
        prop_assert_eq!(out.first(), path.first());
        prop_assert_eq!(out.last(), path.last());
        prop_assert!(out.windows(2).all(|w| w[0].0 < w[1].0));
        prop_assert!(out.iter().all(|p| path.contains(p)));
    }
}
