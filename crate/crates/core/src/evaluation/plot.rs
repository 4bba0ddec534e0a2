//! Minimal PNG charts: lines with shaded bands and bars with error whiskers.

use std::path::Path;

use image::{Rgb, RgbImage};

use crate::error::{Error, Result};

const W: u32 = 640;
const H: u32 = 400;
const MARGIN: f64 = 40.0;
const PALETTE: [[u8; 3]; 6] =
    [[31, 119, 180], [255, 127, 14], [44, 160, 44], [214, 39, 40], [148, 103, 189], [140, 86, 75]];

/// One line of a chart: points `(x, y)` and a half-width band around `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64, f64)>,
}

struct Canvas {
    img: RgbImage,
    x: (f64, f64),
    y: (f64, f64),
}

impl Canvas {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let mut img = RgbImage::from_pixel(W, H, Rgb([255, 255, 255]));
        let (l, b) = (MARGIN as u32, H - MARGIN as u32);
        for px in l..W - 10 {
            img.put_pixel(px, b, Rgb([0, 0, 0]));
        }
        for py in 10..=b {
            img.put_pixel(l, py, Rgb([0, 0, 0]));
        }
        Self { img, x, y }
    }

    fn to_px(&self, x: f64, y: f64) -> (f64, f64) {
        let span = |r: (f64, f64)| if r.1 > r.0 { r.1 - r.0 } else { 1.0 };
        let px = MARGIN + (x - self.x.0) / span(self.x) * (f64::from(W) - MARGIN - 10.0);
        let py = f64::from(H) - MARGIN - (y - self.y.0) / span(self.y) * (f64::from(H) - MARGIN - 10.0);
        (px, py)
    }

    fn blend(&mut self, px: i64, py: i64, c: [u8; 3], alpha: f64) {
        if px < 0 || py < 0 || px >= i64::from(W) || py >= i64::from(H) {
            return;
        }
        let p = self.img.get_pixel_mut(px as u32, py as u32);
        for k in 0..3 {
            p.0[k] = (f64::from(p.0[k]) * (1.0 - alpha) + f64::from(c[k]) * alpha).round() as u8;
        }
    }

    fn segment(&mut self, a: (f64, f64), b: (f64, f64), c: [u8; 3]) {
        let steps = ((b.0 - a.0).abs().max((b.1 - a.1).abs()).ceil() as usize).max(1);
        for s in 0..=steps {
            let t = s as f64 / steps as f64;
            let (x, y) = (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1));
            for (dx, dy) in [(0, 0), (1, 0), (0, 1)] {
                self.blend(x.round() as i64 + dx, y.round() as i64 + dy, c, 1.0);
            }
        }
    }

    fn column(&mut self, x: f64, y0: f64, y1: f64, c: [u8; 3], alpha: f64) {
        let (lo, hi) = (y0.min(y1).round() as i64, y0.max(y1).round() as i64);
        for y in lo..=hi {
            self.blend(x.round() as i64, y, c, alpha);
        }
    }

    fn save(self, path: &Path) -> Result<()> {
        self.img.save(path).map_err(|e| Error::Plot(format!("{}: {e}", path.display())))
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if lo.is_finite() {
        (lo, hi)
    } else {
        (0.0, 1.0)
    }
}

/// Lines with translucent bands, one color per series.
pub fn line_chart(series: &[Series], path: &Path) -> Result<()> {
    let xr = range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let yr = range(series.iter().flat_map(|s| s.points.iter().flat_map(|p| [p.1 - p.2, p.1 + p.2])));
    let mut canvas = Canvas::new(xr, yr);
    for (k, s) in series.iter().enumerate() {
        let c = PALETTE[k % PALETTE.len()];
        for w in s.points.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (pa, pb) = (canvas.to_px(a.0, a.1), canvas.to_px(b.0, b.1));
            let x0 = pa.0.round() as i64;
            let x1 = pb.0.round() as i64;
            for x in x0..x1.max(x0 + 1) {
                let t = if x1 > x0 { (x - x0) as f64 / (x1 - x0) as f64 } else { 0.0 };
                let (y, band) = (a.1 + t * (b.1 - a.1), a.2 + t * (b.2 - a.2));
                let (top, bot) = (canvas.to_px(0.0, y + band).1, canvas.to_px(0.0, y - band).1);
                canvas.column(x as f64, top, bot, c, 0.2);
            }
            canvas.segment(pa, pb, c);
        }
    }
    canvas.save(path)
}

/// Bars of height `mean` with whiskers at `± sd`.
pub fn bar_chart(bars: &[(f64, f64)], path: &Path) -> Result<()> {
    let top = bars.iter().map(|b| b.0 + b.1).fold(100.0f64, f64::max);
    let mut canvas = Canvas::new((0.0, bars.len().max(1) as f64), (0.0, top));
    for (k, &(mean, sd)) in bars.iter().enumerate() {
        let c = PALETTE[k % PALETTE.len()];
        let (x0, y0) = canvas.to_px(k as f64 + 0.15, 0.0);
        let (x1, y1) = canvas.to_px(k as f64 + 0.85, mean);
        for x in x0.round() as i64..=x1.round() as i64 {
            canvas.column(x as f64, y0, y1, c, 0.85);
        }
        let xm = canvas.to_px(k as f64 + 0.5, 0.0).0;
        let (lo, hi) = (canvas.to_px(0.0, mean - sd).1, canvas.to_px(0.0, mean + sd).1);
        canvas.column(xm, lo, hi, [0, 0, 0], 1.0);
    }
    canvas.save(path)
}
