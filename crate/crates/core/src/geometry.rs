//! Camera-side geometry on synthetic inputs: calibration lines, lane
//! assignment of detection boxes, and occupancy density of a binary mask.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Point { x, y }
    }
}

/// Coefficients `(a, b, c)` of `a*x + b*y + c = 0` through two points,
/// scaled so that `a² + b² = 1`.
pub fn line_coefficients<T: Scalar>(p1: Point<T>, p2: Point<T>) -> Result<(T, T, T)> {
    let a = p2.y - p1.y;
    let b = p1.x - p2.x;
    let norm = a.hypot(b);
    if norm == T::zero() {
        return Err(Error::DegenerateLine);
    }
    let c = -a * p1.x - b * p1.y;
    Ok((a / norm, b / norm, c / norm))
}

/// A lane boundary drawn on the image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationLine<T> {
    pub p1: Point<T>,
    pub p2: Point<T>,
    pub a: T,
    pub b: T,
    pub c: T,
}

impl<T: Scalar> CalibrationLine<T> {
    pub fn new(p1: Point<T>, p2: Point<T>) -> Result<Self> {
        let (a, b, c) = line_coefficients(p1, p2)?;
        Ok(CalibrationLine { p1, p2, a, b, c })
    }

    pub fn through(x1: T, y1: T, x2: T, y2: T) -> Result<Self> {
        Self::new(Point::new(x1, y1), Point::new(x2, y2))
    }

    /// Same line shifted by `(dx, dy)`.
    pub fn translated(&self, dx: T, dy: T) -> Result<Self> {
        Self::through(self.p1.x + dx, self.p1.y + dy, self.p2.x + dx, self.p2.y + dy)
    }
}

/// Perpendicular distance; the stored coefficients are already unit-normalized.
pub fn point_line_distance<T: Scalar>(pt: Point<T>, line: &CalibrationLine<T>) -> T {
    (line.a * pt.x + line.b * pt.y + line.c).abs()
}

/// A lane is the strip between a left and a right calibration line.
#[derive(Debug, Clone, PartialEq)]
pub struct LaneRegion<T> {
    pub left: CalibrationLine<T>,
    pub right: CalibrationLine<T>,
    pub color_tag: String,
}

/// Pairs consecutive lines into lanes.
pub fn lane_regions<T: Scalar>(lines: &[CalibrationLine<T>]) -> Result<Vec<LaneRegion<T>>> {
    if lines.is_empty() || !lines.len().is_multiple_of(2) {
        return Err(Error::Config(format!(
            "calibration needs a non-empty even number of lines, got {}",
            lines.len()
        )));
    }
    Ok(lines
        .chunks_exact(2)
        .enumerate()
        .map(|(i, pair)| LaneRegion {
            left: pair[0],
            right: pair[1],
            color_tag: format!("lane-{i}"),
        })
        .collect())
}

/// Detector output: top-left corner plus size, in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionBox<T> {
    pub x0: T,
    pub y0: T,
    pub width: T,
    pub height: T,
}

impl<T: Scalar> DetectionBox<T> {
    pub fn new(x0: T, y0: T, width: T, height: T) -> Result<Self> {
        if !(width > T::zero() && height > T::zero()) {
            return Err(Error::Config("detection box needs positive size".into()));
        }
        Ok(DetectionBox { x0, y0, width, height })
    }

    /// Reference point used for lane assignment: `(x0 + w/2, y0 - h/2)`.
    pub fn center(&self) -> Point<T> {
        let two = T::lit(2.0);
        Point::new(self.x0 + self.width / two, self.y0 - self.height / two)
    }
}

/// Counts vehicles per lane: each box goes to the lane owning its nearest line.
///
/// `lines` holds `2p` lines for `p` lanes. Ties go to the lower line index.
pub fn assign_and_count<T: Scalar>(boxes: &[DetectionBox<T>], lines: &[CalibrationLine<T>]) -> Result<Vec<usize>> {
    if lines.is_empty() || !lines.len().is_multiple_of(2) {
        return Err(Error::Config(format!(
            "calibration needs a non-empty even number of lines, got {}",
            lines.len()
        )));
    }
    let mut counts = vec![0usize; lines.len() / 2];
    for bx in boxes {
        let centre = bx.center();
        let mut best = 0;
        let mut best_d = point_line_distance(centre, &lines[0]);
        for (j, line) in lines.iter().enumerate().skip(1) {
            let d = point_line_distance(centre, line);
            if d < best_d {
                best = j;
                best_d = d;
            }
        }
        counts[best / 2] += 1;
    }
    Ok(counts)
}

/// Axis-aligned region of interest inside a mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Roi {
    pub x0: usize,
    pub y0: usize,
    pub width: usize,
    pub height: usize,
}

/// Binary foreground mask, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupancyMask {
    pub width: usize,
    pub height: usize,
    bits: Vec<bool>,
    pub roi: Roi,
}

impl OccupancyMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>, roi: Roi) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::Config(format!(
                "mask holds {} cells, expected {}x{}",
                bits.len(),
                width,
                height
            )));
        }
        if roi.x0 + roi.width > width || roi.y0 + roi.height > height {
            return Err(Error::Config("roi extends past the mask".into()));
        }
        Ok(OccupancyMask {
            width,
            height,
            bits,
            roi,
        })
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, on: bool) {
        self.bits[y * self.width + x] = on;
    }

    /// Parses `width height x0 y0 roi_w roi_h` followed by `height` rows of `0`/`1`.
    pub fn parse_fixture(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Fixture {
            line: 1,
            msg: "missing header".into(),
        })?;
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Fixture {
                line: 1,
                msg: format!("bad header: {e}"),
            })?;
        let [width, height, x0, y0, rw, rh] = nums[..] else {
            return Err(Error::Fixture {
                line: 1,
                msg: "header needs 6 integers".into(),
            });
        };
        let mut bits = Vec::with_capacity(width * height);
        let mut rows = 0;
        for (n, row) in lines {
            let row = row.trim();
            if row.len() != width {
                return Err(Error::Fixture {
                    line: n + 1,
                    msg: format!("row has {} cells, expected {width}", row.len()),
                });
            }
            for c in row.chars() {
                bits.push(match c {
                    '0' => false,
                    '1' => true,
                    other => {
                        return Err(Error::Fixture {
                            line: n + 1,
                            msg: format!("unexpected cell `{other}`"),
                        })
                    }
                });
            }
            rows += 1;
        }
        if rows != height {
            return Err(Error::Fixture {
                line: rows + 1,
                msg: format!("expected {height} rows, found {rows}"),
            });
        }
        let roi = Roi {
            x0,
            y0,
            width: rw,
            height: rh,
        };
        OccupancyMask::new(width, height, bits, roi)
    }
}

/// Share of set pixels inside the region of interest.
pub fn mask_density<T: Scalar>(mask: &OccupancyMask) -> Result<T> {
    let area = mask.roi.width * mask.roi.height;
    if area == 0 {
        return Err(Error::Config("region of interest has zero area".into()));
    }
    let mut set = 0usize;
    for y in mask.roi.y0..mask.roi.y0 + mask.roi.height {
        let row = &mask.bits[y * mask.width..(y + 1) * mask.width];
        set += row[mask.roi.x0..mask.roi.x0 + mask.roi.width]
            .iter()
            .filter(|&&b| b)
            .count();
    }
    Ok(T::lit(set as f64) / T::lit(area as f64))
}

/// One line per calibration line: `x1 y1 x2 y2`.
pub fn parse_calibration<T: Scalar>(text: &str) -> Result<Vec<CalibrationLine<T>>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let nums: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Fixture {
                line: n + 1,
                msg: e.to_string(),
            })?;
        let [x1, y1, x2, y2] = nums[..] else {
            return Err(Error::Fixture {
                line: n + 1,
                msg: "expected `x1 y1 x2 y2`".into(),
            });
        };
        let l =
            CalibrationLine::through(T::lit(x1), T::lit(y1), T::lit(x2), T::lit(y2)).map_err(|e| Error::Fixture {
                line: n + 1,
                msg: e.to_string(),
            })?;
        out.push(l);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vline(x: f64) -> CalibrationLine<f64> {
        CalibrationLine::through(x, 0.0, x, 10.0).unwrap()
    }

    #[test]
    fn vertical_and_horizontal_coefficients() {
        let (a, b, c) = line_coefficients(Point::new(0.0f64, 0.0), Point::new(0.0, 10.0)).unwrap();
        assert_eq!((a.abs(), b, c), (1.0, 0.0, 0.0));
        let (a, b, c) = line_coefficients(Point::new(0.0f64, 0.0), Point::new(10.0, 0.0)).unwrap();
        assert_eq!((a, b.abs(), c), (0.0, 1.0, 0.0));
        assert_eq!(
            line_coefficients(Point::new(3.0, 3.0), Point::new(3.0, 3.0)),
            Err(Error::DegenerateLine)
        );
    }

    #[test]
    fn distances() {
        assert_eq!(point_line_distance(Point::new(5.0, 5.0), &vline(0.0)), 5.0);
        let diag = CalibrationLine::through(0.0f64, 0.0, 4.0, 4.0).unwrap();
        assert!(point_line_distance(Point::new(2.0, 2.0), &diag).abs() < 1e-12);
        let rev = CalibrationLine::through(4.0f64, 4.0, 0.0, 0.0).unwrap();
        let p = Point::new(7.0, -1.0);
        assert!((point_line_distance(p, &diag) - point_line_distance(p, &rev)).abs() < 1e-12);
        assert!((point_line_distance(p, &diag) - 8.0 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn two_lane_assignment() {
        let lines = [vline(0.0), vline(10.0), vline(10.0), vline(20.0)];
        let b = DetectionBox::new(2.0, 8.0, 4.0, 4.0).unwrap();
        assert_eq!(b.center(), Point::new(4.0, 6.0));
        assert_eq!(assign_and_count(&[b], &lines).unwrap(), vec![1, 0]);
        let far = DetectionBox::new(15.0, 8.0, 4.0, 4.0).unwrap();
        assert_eq!(assign_and_count(&[b, far, far], &lines).unwrap(), vec![1, 2]);
        assert_eq!(assign_and_count::<f64>(&[], &lines).unwrap(), vec![0, 0]);
        assert!(assign_and_count(&[b], &[]).is_err());
        assert!(assign_and_count(&[b], &lines[..3]).is_err());
    }

    #[test]
    fn equidistant_goes_to_lower_line() {
        // centre (5, 6) sits halfway between x=0 and x=10
        let lines = [vline(0.0), vline(10.0)];
        let b = DetectionBox::new(3.0, 8.0, 4.0, 4.0).unwrap();
        assert_eq!(assign_and_count(&[b], &lines).unwrap(), vec![1]);
        let lines = [vline(0.0), vline(4.0), vline(6.0), vline(20.0)];
        assert_eq!(assign_and_count(&[b], &lines).unwrap(), vec![1, 0]);
    }

    #[test]
    fn density_basics() {
        let roi = Roi {
            x0: 0,
            y0: 0,
            width: 10,
            height: 10,
        };
        let mut m = OccupancyMask::new(10, 10, vec![false; 100], roi).unwrap();
        assert_eq!(mask_density::<f64>(&m).unwrap(), 0.0);
        for i in 0..25 {
            m.set(i % 10, i / 10, true);
        }
        assert_eq!(mask_density::<f64>(&m).unwrap(), 0.25);
        let full = OccupancyMask::new(10, 10, vec![true; 100], roi).unwrap();
        assert_eq!(mask_density::<f32>(&full).unwrap(), 1.0);
        let zero = Roi {
            x0: 2,
            y0: 2,
            width: 0,
            height: 3,
        };
        let m = OccupancyMask::new(10, 10, vec![true; 100], zero).unwrap();
        assert!(matches!(mask_density::<f64>(&m), Err(Error::Config(_))));
        assert!(OccupancyMask::new(
            10,
            10,
            vec![true; 100],
            Roi {
                x0: 5,
                y0: 0,
                width: 6,
                height: 1
            }
        )
        .is_err());
    }

    #[test]
    fn mask_fixture() {
        let text = "4 3 1 0 2 2\n0110\n0010\n1111\n";
        let m = OccupancyMask::parse_fixture(text).unwrap();
        assert_eq!(mask_density::<f64>(&m).unwrap(), 0.75);
        assert!(OccupancyMask::parse_fixture("4 3 1 0 2 2\n0110\n0010\n").is_err());
        assert!(OccupancyMask::parse_fixture("4 1 0 0 1 1\n01a0\n").is_err());
        assert!(OccupancyMask::parse_fixture("4 1 0 0\n0100\n").is_err());
    }

    #[test]
    fn calibration_fixture() {
        let lines = parse_calibration::<f64>("0 0 0 10\n10 0 10 10\n").unwrap();
        assert_eq!(lines.len(), 2);
        assert_eq!(lane_regions(&lines).unwrap().len(), 1);
        assert!(parse_calibration::<f64>("0 0 0 0\n").is_err());
        assert!(parse_calibration::<f64>("0 0 1\n").is_err());
        assert!(lane_regions(&lines[..1]).is_err());
    }
}
