#![allow(dead_code)]

use std::collections::VecDeque;

use mmtopo::{BinaryImage, GrayscaleImage, Interval, PersistenceDiagram, Raster};
use rand::Rng;

/// Betti numbers by flood fill: black components under 8-adjacency, and
/// white components under 4-adjacency that do not touch the border.
pub fn flood_betti(b: &BinaryImage) -> (usize, usize) {
    let (w, h) = (b.width() as i64, b.height() as i64);
    let black = |x: i64, y: i64| b.is_black(x as usize, y as usize);
    let mut seen = vec![false; (w * h) as usize];
    let (mut b0, mut b1) = (0, 0);
    for y0 in 0..h {
        for x0 in 0..w {
            if seen[(y0 * w + x0) as usize] {
                continue;
            }
            let colour = black(x0, y0);
            let nbrs: &[(i64, i64)] = if colour {
                &[(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)]
            } else {
                &[(0, -1), (-1, 0), (1, 0), (0, 1)]
            };
            let mut touches_border = false;
            let mut queue = VecDeque::from([(x0, y0)]);
            seen[(y0 * w + x0) as usize] = true;
            while let Some((x, y)) = queue.pop_front() {
                if x == 0 || y == 0 || x == w - 1 || y == h - 1 {
                    touches_border = true;
                }
                for &(dx, dy) in nbrs {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w || ny >= h {
                        continue;
                    }
                    let k = (ny * w + nx) as usize;
                    if !seen[k] && black(nx, ny) == colour {
                        seen[k] = true;
                        queue.push_back((nx, ny));
                    }
                }
            }
            if colour {
                b0 += 1;
            } else if !touches_border {
                b1 += 1;
            }
        }
    }
    (b0, b1)
}

pub fn random_binary(rng: &mut impl Rng, max_side: usize, density: f64) -> BinaryImage {
    let w = rng.gen_range(1..=max_side);
    let h = rng.gen_range(1..=max_side);
    let bits = (0..w * h).map(|_| u8::from(!rng.gen_bool(density))).collect();
    BinaryImage::new(w, h, bits).unwrap()
}

pub fn random_gray(rng: &mut impl Rng, max_side: usize, max_value: u32) -> GrayscaleImage {
    let w = rng.gen_range(1..=max_side);
    let h = rng.gen_range(1..=max_side);
    let values = (0..w * h).map(|_| rng.gen_range(0..=max_value)).collect();
    GrayscaleImage::new(w, h, max_value, values).unwrap()
}

/// Random finite diagram of one dimension with small integer-ish coordinates.
pub fn random_points(rng: &mut impl Rng, max_points: usize) -> Vec<(f64, f64)> {
    let n = rng.gen_range(0..=max_points);
    (0..n)
        .map(|_| {
            let b = rng.gen_range(0..20) as f64 / 4.0;
            let l = rng.gen_range(1..20) as f64 / 4.0;
            (b, b + l)
        })
        .collect()
}

pub fn diagram(dim: u8, pts: &[(f64, f64)]) -> PersistenceDiagram {
    PersistenceDiagram::new(pts.iter().map(|&(b, d)| Interval::new(dim, b, d)).collect())
}

/// Bottleneck distance by enumerating every partial injection of `a` into `b`;
/// unmatched points on either side go to the diagonal.
pub fn brute_bottleneck(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    fn diag(p: (f64, f64)) -> f64 {
        (p.1 - p.0) / 2.0
    }
    fn go(k: usize, a: &[(f64, f64)], b: &[(f64, f64)], used: &mut [bool], cost: f64, best: &mut f64) {
        if cost >= *best {
            return;
        }
        if k == a.len() {
            let rest = b.iter().zip(used.iter()).filter(|(_, u)| !**u).map(|(q, _)| diag(*q)).fold(0.0, f64::max);
            *best = best.min(cost.max(rest));
            return;
        }
        go(k + 1, a, b, used, cost.max(diag(a[k])), best);
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                let c = (a[k].0 - b[j].0).abs().max((a[k].1 - b[j].1).abs());
                go(k + 1, a, b, used, cost.max(c), best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(0, a, b, &mut vec![false; b.len()], 0.0, &mut best);
    best
}

pub mod strategies {
    use mmtopo::{BinaryImage, GrayscaleImage, StructuringElement};
    use proptest::collection::vec;
    use proptest::prelude::*;

    pub fn gray(max_side: usize, max_value: u32) -> impl Strategy<Value = GrayscaleImage> {
        (1..=max_side, 1..=max_side).prop_flat_map(move |(w, h)| {
            vec(0..=max_value, w * h).prop_map(move |v| GrayscaleImage::new(w, h, max_value, v).unwrap())
        })
    }

    /// Two images of the same size with `f <= g` pixelwise.
    pub fn gray_pair(max_side: usize, max_value: u32) -> impl Strategy<Value = (GrayscaleImage, GrayscaleImage)> {
        (1..=max_side, 1..=max_side).prop_flat_map(move |(w, h)| {
            vec((0..=max_value, 0..=max_value), w * h).prop_map(move |v| {
                let lo = v.iter().map(|p| p.0.min(p.1)).collect();
                let hi = v.iter().map(|p| p.0.max(p.1)).collect();
                (GrayscaleImage::new(w, h, max_value, lo).unwrap(), GrayscaleImage::new(w, h, max_value, hi).unwrap())
            })
        })
    }

    pub fn binary(max_side: usize) -> impl Strategy<Value = BinaryImage> {
        (1..=max_side, 1..=max_side)
            .prop_flat_map(|(w, h)| vec(0..=1u8, w * h).prop_map(move |v| BinaryImage::new(w, h, v).unwrap()))
    }

    pub fn se() -> impl Strategy<Value = StructuringElement> {
        vec((-2..=2i32, -2..=2i32), 0..5).prop_map(|mut v| {
            v.push((0, 0));
            v.sort_unstable();
            v.dedup();
            StructuringElement::new(v).unwrap()
        })
    }

    /// `(B1, B2)` with `B1` a subset of `B2`.
    pub fn nested_se_pair() -> impl Strategy<Value = (StructuringElement, StructuringElement)> {
        (se(), vec((-3..=3i32, -3..=3i32), 0..4)).prop_map(|(b1, extra)| {
            let mut v = b1.offsets().to_vec();
            v.extend(extra);
            v.sort_unstable();
            v.dedup();
            (b1, StructuringElement::new(v).unwrap())
        })
    }

    pub fn rectangle() -> impl Strategy<Value = StructuringElement> {
        (-3..=0i32, 0..=3i32, -3..=0i32, 0..=3i32)
            .prop_map(|(x0, x1, y0, y1)| StructuringElement::rectangle(x0, x1, y0, y1).unwrap())
    }
}
