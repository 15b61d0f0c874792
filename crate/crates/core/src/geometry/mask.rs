use image::{GrayImage, Luma};

use super::{Point, Quad};

/// Row-major binary mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: u32,
    height: u32,
    data: Vec<bool>,
}

impl Mask {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            data: vec![false; width as usize * height as usize],
        }
    }

    pub fn full(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            data: vec![true; width as usize * height as usize],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    fn idx(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        x < self.width && y < self.height && self.data[self.idx(x, y)]
    }

    /// Like [`Mask::get`] with signed coordinates; out of range is `false`.
    #[inline]
    pub fn get_i(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && self.get(x as u32, y as u32)
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        let i = self.idx(x, y);
        self.data[i] = v;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&b| b)
    }

    pub fn iter_set(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let w = self.width as usize;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| ((i % w) as u32, (i / w) as u32))
    }

    /// Pixels whose centers fall inside the quad (boundary inclusive).
    pub fn from_quad(width: u32, height: u32, quad: &Quad) -> Self {
        let mut m = Self::new(width, height);
        m.fill_quad(quad, true);
        m
    }

    pub fn fill_quad(&mut self, quad: &Quad, v: bool) {
        let r = quad.bounding_rect();
        let x0 = (r.x - 0.5).ceil().max(0.0) as i64;
        let y0 = (r.y - 0.5).ceil().max(0.0) as i64;
        let x1 = ((r.x + r.w - 0.5).floor() as i64).min(self.width as i64 - 1);
        let y1 = ((r.y + r.h - 0.5).floor() as i64).min(self.height as i64 - 1);
        for y in y0..=y1 {
            for x in x0..=x1 {
                if quad.contains(Point::new(x as f64 + 0.5, y as f64 + 0.5)) {
                    self.set(x as u32, y as u32, v);
                }
            }
        }
    }

    pub fn union_with(&mut self, other: &Mask) {
        assert_eq!((self.width, self.height), (other.width, other.height));
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a |= b;
        }
    }

    pub fn is_subset_of(&self, other: &Mask) -> bool {
        (self.width, self.height) == (other.width, other.height)
            && self.data.iter().zip(&other.data).all(|(&a, &b)| !a || b)
    }

    fn window_counts(&self, r: u32) -> Vec<u32> {
        // Counts of set pixels in the (2r+1)^2 window, via a summed-area table.
        let (w, h) = (self.width as usize, self.height as usize);
        let mut sat = vec![0u32; (w + 1) * (h + 1)];
        for y in 0..h {
            let mut row = 0u32;
            for x in 0..w {
                row += self.data[y * w + x] as u32;
                sat[(y + 1) * (w + 1) + x + 1] = sat[y * (w + 1) + x + 1] + row;
            }
        }
        let r = r as usize;
        let mut out = vec![0u32; w * h];
        for y in 0..h {
            let ya = y.saturating_sub(r);
            let yb = (y + r + 1).min(h);
            for x in 0..w {
                let xa = x.saturating_sub(r);
                let xb = (x + r + 1).min(w);
                out[y * w + x] = sat[yb * (w + 1) + xb] + sat[ya * (w + 1) + xa]
                    - sat[ya * (w + 1) + xb]
                    - sat[yb * (w + 1) + xa];
            }
        }
        out
    }

    /// Square-element dilation of radius `r`.
    pub fn dilate(&self, r: u32) -> Mask {
        if r == 0 {
            return self.clone();
        }
        let counts = self.window_counts(r);
        Mask {
            width: self.width,
            height: self.height,
            data: counts.into_iter().map(|c| c > 0).collect(),
        }
    }

    /// Square-element erosion of radius `r`; pixels outside the mask's
    /// frame count as unset.
    pub fn erode(&self, r: u32) -> Mask {
        if r == 0 {
            return self.clone();
        }
        let full = (2 * r + 1) * (2 * r + 1);
        let counts = self.window_counts(r);
        Mask {
            width: self.width,
            height: self.height,
            data: counts.into_iter().map(|c| c == full).collect(),
        }
    }

    /// 0/255 grayscale rendering.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage::from_fn(self.width, self.height, |x, y| {
            Luma([if self.get(x, y) { 255 } else { 0 }])
        })
    }

    /// Pixels with value >= 128 are set.
    pub fn from_gray(img: &GrayImage) -> Self {
        Self {
            width: img.width(),
            height: img.height(),
            data: img.pixels().map(|p| p[0] >= 128).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quad_fill_uses_pixel_centers() {
        let q = Quad::from_coords([0., 0., 10., 0., 10., 4., 0., 4.]).unwrap();
        let m = Mask::from_quad(20, 20, &q);
        assert_eq!(m.count(), 40);
        assert!(m.get(9, 3) && !m.get(10, 3) && !m.get(9, 4));
    }

    #[test]
    fn dilate_and_erode_square() {
        let mut m = Mask::new(11, 11);
        m.set(5, 5, true);
        let d = m.dilate(2);
        assert_eq!(d.count(), 25);
        assert_eq!(d.erode(2).count(), 1);
        // erosion treats the frame edge as background
        assert_eq!(Mask::full(5, 5).erode(1).count(), 9);
    }
}
