//! Synthetic images for demonstrations and experiments.

use crate::image::{BinaryImage, GrayscaleImage, ImageError};

/// A square hole placement: top-left pixel and size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

/// Layout of [`rect_holes_image`]: holes in a row, 10 pixels apart, each
/// `width` wide and `width + 10` tall, vertically centred.
pub fn rect_hole_layout(size: usize, widths: &[usize]) -> Result<Vec<Rect>, ImageError> {
    const GAP: usize = 10;
    if widths.is_empty() || widths.contains(&0) {
        return Err(ImageError::MalformedInput("hole widths must be positive".into()));
    }
    let total: usize = widths.iter().sum::<usize>() + GAP * (widths.len() + 1);
    let tallest = widths.iter().max().unwrap() + GAP;
    if total > size || tallest + 2 * GAP > size {
        return Err(ImageError::MalformedInput(format!("holes do not fit in a {size}x{size} image")));
    }
    let mut x = GAP;
    Ok(widths
        .iter()
        .map(|&w| {
            let h = w + GAP;
            let r = Rect { x, y: (size - h) / 2, w, h };
            x += w + GAP;
            r
        })
        .collect())
}

/// Black `size x size` field with white rectangular holes of the given widths.
pub fn rect_holes_image(size: usize, widths: &[usize]) -> Result<BinaryImage, ImageError> {
    let rects = rect_hole_layout(size, widths)?;
    Ok(paint_holes(size, size, &rects))
}

fn paint_holes(width: usize, height: usize, rects: &[Rect]) -> BinaryImage {
    let mut bits = vec![0u8; width * height];
    for r in rects {
        for y in r.y..r.y + r.h {
            bits[y * width + r.x..y * width + r.x + r.w].fill(1);
        }
    }
    BinaryImage::new(width, height, bits).expect("valid geometry")
}

/// Which holes of [`disk_with_two_holes`] to cut out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiskHoles {
    Both,
    NearEdge,
    Interior,
}

/// A black disk (radius 45, centred in a 100x100 white image) with two
/// congruent 10x10 white holes: one 6 pixels from the disk's left edge, one
/// well inside.
pub fn disk_with_two_holes(which: DiskHoles) -> BinaryImage {
    let (n, c, r) = (100usize, 49.5f64, 45.0f64);
    let mut bits = vec![1u8; n * n];
    for y in 0..n {
        for x in 0..n {
            let (dx, dy) = (x as f64 - c, y as f64 - c);
            if dx * dx + dy * dy <= r * r {
                bits[y * n + x] = 0;
            }
        }
    }
    let near = Rect { x: 11, y: 45, w: 10, h: 10 };
    let inner = Rect { x: 55, y: 45, w: 10, h: 10 };
    let rects: &[Rect] = match which {
        DiskHoles::Both => &[near, inner],
        DiskHoles::NearEdge => &[near],
        DiskHoles::Interior => &[inner],
    };
    for rect in rects {
        for y in rect.y..rect.y + rect.h {
            bits[y * n + rect.x..y * n + rect.x + rect.w].fill(1);
        }
    }
    BinaryImage::new(n, n, bits).expect("valid geometry")
}

/// `size x size` 8-bit image: a diagonal gradient from 120 to 220 carrying
/// five dark rings (value 30, radii 6..16) with bright centres (value 200).
pub fn gradient_with_rings(size: usize) -> GrayscaleImage {
    let s = size as f64;
    let centres = [(0.25, 0.25), (0.75, 0.25), (0.5, 0.5), (0.25, 0.75), (0.75, 0.75)];
    let span = (2 * size - 2).max(1) as f64;
    let mut values = Vec::with_capacity(size * size);
    for y in 0..size {
        for x in 0..size {
            let mut v = 120.0 + 100.0 * (x + y) as f64 / span;
            for &(cx, cy) in &centres {
                let d = ((x as f64 - cx * s).powi(2) + (y as f64 - cy * s).powi(2)).sqrt();
                if d < 6.0 {
                    v = 200.0;
                } else if d < 16.0 {
                    v = 30.0;
                }
            }
            values.push(v.round() as u32);
        }
    }
    GrayscaleImage::new(size, size, 255, values).expect("values within 0..=255")
}
