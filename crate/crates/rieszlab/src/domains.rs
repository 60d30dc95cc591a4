//! Bounded test domains with exact volume and boundary measure.
//!
//! Supported kinds: intervals (d=1), rectangles, axis-aligned boxes (d=3),
//! disks, and simple polygons. Volume and surface measure are recomputed from
//! the geometry at construction; the CLI spec strings are
//! `interval:L`, `rect:WxH`, `disk:R`, `poly:x0,y0;x1,y1;...`.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("invalid domain: {0}")]
    Invalid(String),
    #[error("unknown domain spec `{0}`")]
    UnknownSpec(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum DomainKind {
    Interval { length: f64 },
    Rectangle { w: f64, h: f64 },
    Box { w: f64, h: f64, depth: f64 },
    Disk { radius: f64 },
    Polygon { vertices: Vec<(f64, f64)> },
}

/// Axis-aligned bounding box, one (lo, hi) pair per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundingBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Domain {
    pub kind: DomainKind,
    pub volume: f64,
    pub boundary_measure: f64,
    pub bounding_box: BoundingBox,
}

fn shoelace(v: &[(f64, f64)]) -> f64 {
    let n = v.len();
    let mut acc = 0.0;
    for i in 0..n {
        let (x0, y0) = v[i];
        let (x1, y1) = v[(i + 1) % n];
        acc += x0 * y1 - x1 * y0;
    }
    0.5 * acc
}

fn perimeter(v: &[(f64, f64)]) -> f64 {
    let n = v.len();
    (0..n)
        .map(|i| {
            let (x0, y0) = v[i];
            let (x1, y1) = v[(i + 1) % n];
            (x1 - x0).hypot(y1 - y0)
        })
        .sum()
}

fn segments_properly_intersect(a: (f64, f64), b: (f64, f64), c: (f64, f64), d: (f64, f64)) -> bool {
    let cross = |o: (f64, f64), p: (f64, f64), q: (f64, f64)| {
        (p.0 - o.0) * (q.1 - o.1) - (p.1 - o.1) * (q.0 - o.0)
    };
    let d1 = cross(c, d, a);
    let d2 = cross(c, d, b);
    let d3 = cross(a, b, c);
    let d4 = cross(a, b, d);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

impl Domain {
    pub fn interval(length: f64) -> Result<Self, DomainError> {
        if !(length > 0.0) {
            return Err(DomainError::Invalid("interval length must be > 0".into()));
        }
        Ok(Self {
            kind: DomainKind::Interval { length },
            volume: length,
            boundary_measure: 2.0,
            bounding_box: BoundingBox {
                lo: vec![0.0],
                hi: vec![length],
            },
        })
    }

    pub fn rectangle(w: f64, h: f64) -> Result<Self, DomainError> {
        if !(w > 0.0 && h > 0.0) {
            return Err(DomainError::Invalid("rectangle sides must be > 0".into()));
        }
        Ok(Self {
            kind: DomainKind::Rectangle { w, h },
            volume: w * h,
            boundary_measure: 2.0 * (w + h),
            bounding_box: BoundingBox {
                lo: vec![0.0, 0.0],
                hi: vec![w, h],
            },
        })
    }

    pub fn cuboid(w: f64, h: f64, depth: f64) -> Result<Self, DomainError> {
        if !(w > 0.0 && h > 0.0 && depth > 0.0) {
            return Err(DomainError::Invalid("box sides must be > 0".into()));
        }
        Ok(Self {
            kind: DomainKind::Box { w, h, depth },
            volume: w * h * depth,
            boundary_measure: 2.0 * (w * h + w * depth + h * depth),
            bounding_box: BoundingBox {
                lo: vec![0.0, 0.0, 0.0],
                hi: vec![w, h, depth],
            },
        })
    }

    pub fn disk(radius: f64) -> Result<Self, DomainError> {
        if !(radius > 0.0) {
            return Err(DomainError::Invalid("disk radius must be > 0".into()));
        }
        Ok(Self {
            kind: DomainKind::Disk { radius },
            volume: std::f64::consts::PI * radius * radius,
            boundary_measure: 2.0 * std::f64::consts::PI * radius,
            bounding_box: BoundingBox {
                lo: vec![-radius, -radius],
                hi: vec![radius, radius],
            },
        })
    }

    /// Simple polygon; reversed to positive orientation if given clockwise.
    pub fn polygon(mut vertices: Vec<(f64, f64)>) -> Result<Self, DomainError> {
        if vertices.len() < 3 {
            return Err(DomainError::Invalid("polygon needs >= 3 vertices".into()));
        }
        let area2 = shoelace(&vertices);
        if area2.abs() < 1e-300 {
            return Err(DomainError::Invalid("degenerate polygon".into()));
        }
        if area2 < 0.0 {
            vertices.reverse();
        }
        let n = vertices.len();
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            for j in i + 1..n {
                let c = vertices[j];
                let d = vertices[(j + 1) % n];
                if segments_properly_intersect(a, b, c, d) {
                    return Err(DomainError::Invalid("polygon self-intersects".into()));
                }
            }
        }
        let volume = shoelace(&vertices).abs();
        let boundary_measure = perimeter(&vertices);
        let xs: Vec<f64> = vertices.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = vertices.iter().map(|p| p.1).collect();
        let min = |v: &[f64]| v.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = |v: &[f64]| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            kind: DomainKind::Polygon { vertices },
            volume,
            boundary_measure,
            bounding_box: BoundingBox {
                lo: vec![min(&xs), min(&ys)],
                hi: vec![max(&xs), max(&ys)],
            },
        })
    }

    /// Space dimension of the ambient domain.
    pub fn dim(&self) -> u32 {
        match self.kind {
            DomainKind::Interval { .. } => 1,
            DomainKind::Box { .. } => 3,
            _ => 2,
        }
    }

    pub fn diameter(&self) -> f64 {
        match &self.kind {
            DomainKind::Interval { length } => *length,
            DomainKind::Rectangle { w, h } => w.hypot(*h),
            DomainKind::Box { w, h, depth } => (w * w + h * h + depth * depth).sqrt(),
            DomainKind::Disk { radius } => 2.0 * radius,
            DomainKind::Polygon { vertices } => {
                let mut best = 0.0f64;
                for (i, a) in vertices.iter().enumerate() {
                    for b in vertices.iter().skip(i + 1) {
                        best = best.max((a.0 - b.0).hypot(a.1 - b.1));
                    }
                }
                best
            }
        }
    }

    /// Membership test; boundary points count as inside.
    pub fn contains(&self, point: &[f64]) -> bool {
        match &self.kind {
            DomainKind::Interval { length } => {
                point.len() == 1 && point[0] >= 0.0 && point[0] <= *length
            }
            DomainKind::Rectangle { w, h } => {
                point.len() == 2
                    && point[0] >= 0.0
                    && point[0] <= *w
                    && point[1] >= 0.0
                    && point[1] <= *h
            }
            DomainKind::Box { w, h, depth } => {
                point.len() == 3
                    && point[0] >= 0.0
                    && point[0] <= *w
                    && point[1] >= 0.0
                    && point[1] <= *h
                    && point[2] >= 0.0
                    && point[2] <= *depth
            }
            DomainKind::Disk { radius } => point.len() == 2 && point[0].hypot(point[1]) <= *radius,
            DomainKind::Polygon { vertices } => {
                if point.len() != 2 {
                    return false;
                }
                polygon_contains(vertices, (point[0], point[1]))
            }
        }
    }

    /// Uniformly scaled copy (volume scales by s^d, boundary by s^{d-1}).
    pub fn scaled(&self, s: f64) -> Result<Self, DomainError> {
        if !(s > 0.0) {
            return Err(DomainError::Invalid("scale must be > 0".into()));
        }
        match &self.kind {
            DomainKind::Interval { length } => Self::interval(length * s),
            DomainKind::Rectangle { w, h } => Self::rectangle(w * s, h * s),
            DomainKind::Box { w, h, depth } => Self::cuboid(w * s, h * s, depth * s),
            DomainKind::Disk { radius } => Self::disk(radius * s),
            DomainKind::Polygon { vertices } => {
                Self::polygon(vertices.iter().map(|&(x, y)| (x * s, y * s)).collect())
            }
        }
    }

    /// Parses the CLI spec string form.
    pub fn parse_spec(spec: &str) -> Result<Self, DomainError> {
        let (kind, rest) = spec
            .split_once(':')
            .ok_or_else(|| DomainError::UnknownSpec(spec.into()))?;
        let num = |s: &str| -> Result<f64, DomainError> {
            s.parse::<f64>()
                .map_err(|_| DomainError::UnknownSpec(spec.into()))
        };
        match kind {
            "interval" => Self::interval(num(rest)?),
            "rect" => {
                let (w, h) = rest
                    .split_once('x')
                    .ok_or_else(|| DomainError::UnknownSpec(spec.into()))?;
                Self::rectangle(num(w)?, num(h)?)
            }
            "disk" => Self::disk(num(rest)?),
            "poly" => {
                let mut vertices = Vec::new();
                for pair in rest.split(';') {
                    let (x, y) = pair
                        .split_once(',')
                        .ok_or_else(|| DomainError::UnknownSpec(spec.into()))?;
                    vertices.push((num(x)?, num(y)?));
                }
                Self::polygon(vertices)
            }
            _ => Err(DomainError::UnknownSpec(spec.into())),
        }
    }

    /// Round-trip spec string (used in the Spectrum JSON header).
    pub fn spec_string(&self) -> String {
        match &self.kind {
            DomainKind::Interval { length } => format!("interval:{length}"),
            DomainKind::Rectangle { w, h } => format!("rect:{w}x{h}"),
            DomainKind::Box { w, h, depth } => format!("box:{w}x{h}x{depth}"),
            DomainKind::Disk { radius } => format!("disk:{radius}"),
            DomainKind::Polygon { vertices } => {
                let parts: Vec<String> = vertices.iter().map(|(x, y)| format!("{x},{y}")).collect();
                format!("poly:{}", parts.join(";"))
            }
        }
    }
}

fn point_on_segment(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> bool {
    let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
    let scale = (b.0 - a.0).hypot(b.1 - a.1).max(1e-300);
    if cross.abs() > 1e-12 * scale {
        return false;
    }
    let dot = (p.0 - a.0) * (b.0 - a.0) + (p.1 - a.1) * (b.1 - a.1);
    dot >= -1e-12 * scale && dot <= scale * scale + 1e-12 * scale
}

fn polygon_contains(vertices: &[(f64, f64)], p: (f64, f64)) -> bool {
    let n = vertices.len();
    for i in 0..n {
        if point_on_segment(vertices[i], vertices[(i + 1) % n], p) {
            return true; // boundary counts as inside
        }
    }
    // Even-odd rule with a horizontal ray.
    let mut inside = false;
    for i in 0..n {
        let (x0, y0) = vertices[i];
        let (x1, y1) = vertices[(i + 1) % n];
        if (y0 > p.1) != (y1 > p.1) {
            let x_cross = x0 + (p.1 - y0) / (y1 - y0) * (x1 - x0);
            if p.0 < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn l_shape() -> Domain {
        Domain::polygon(vec![
            (0.0, 0.0),
            (2.0, 0.0),
            (2.0, 1.0),
            (1.0, 1.0),
            (1.0, 2.0),
            (0.0, 2.0),
        ])
        .unwrap()
    }

    #[test]
    fn unit_square_measures() {
        let d = Domain::rectangle(1.0, 1.0).unwrap();
        assert_eq!(d.volume, 1.0);
        assert_eq!(d.boundary_measure, 4.0);
    }

    #[test]
    fn disk_measures() {
        let d = Domain::disk(1.0).unwrap();
        assert_relative_eq!(d.volume, std::f64::consts::PI);
        assert_relative_eq!(d.boundary_measure, 2.0 * std::f64::consts::PI);
    }

    #[test]
    fn l_shape_measures() {
        let d = l_shape();
        assert_relative_eq!(d.volume, 3.0);
        assert_relative_eq!(d.boundary_measure, 8.0);
    }

    #[test]
    fn containment() {
        assert!(Domain::rectangle(1.0, 1.0).unwrap().contains(&[0.5, 0.5]));
        assert!(!Domain::disk(1.0).unwrap().contains(&[1.1, 0.0]));
        let l = l_shape();
        assert!(!l.contains(&[1.5, 1.5]));
        assert!(l.contains(&[0.5, 1.5]));
        // boundary counts as inside
        assert!(l.contains(&[1.0, 1.5]));
        assert!(Domain::rectangle(1.0, 1.0).unwrap().contains(&[0.0, 0.7]));
    }

    #[test]
    fn degenerate_rejected() {
        assert!(Domain::rectangle(0.0, 1.0).is_err());
        assert!(Domain::polygon(vec![(0.0, 0.0), (1.0, 0.0)]).is_err());
        // bow-tie self-intersection
        assert!(Domain::polygon(vec![(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)]).is_err());
    }

    #[test]
    fn clockwise_polygon_reoriented() {
        let d = Domain::polygon(vec![(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)]).unwrap();
        assert_relative_eq!(d.volume, 1.0);
        if let DomainKind::Polygon { vertices } = &d.kind {
            assert!(shoelace(vertices) > 0.0);
        }
    }

    #[test]
    fn spec_strings_round_trip() {
        for s in [
            "interval:2.5",
            "rect:1x1",
            "disk:0.5",
            "poly:0,0;2,0;2,1;1,1;1,2;0,2",
        ] {
            let d = Domain::parse_spec(s).unwrap();
            let d2 = Domain::parse_spec(&d.spec_string()).unwrap();
            assert_eq!(d.volume, d2.volume);
            assert_eq!(d.boundary_measure, d2.boundary_measure);
        }
        assert!(Domain::parse_spec("pentagon:3").is_err());
    }

    proptest! {
        #[test]
        fn scaling_law(s in 0.1f64..10.0) {
            for base in [Domain::rectangle(1.3, 0.4).unwrap(), Domain::disk(0.8).unwrap(), l_shape(), Domain::cuboid(1.0, 2.0, 0.5).unwrap()] {
                let d = base.dim() as i32;
                let scaled = base.scaled(s).unwrap();
                prop_assert!((scaled.volume - base.volume * s.powi(d)).abs() < 1e-10 * scaled.volume.max(1.0));
                prop_assert!((scaled.boundary_measure - base.boundary_measure * s.powi(d - 1)).abs() < 1e-10 * scaled.boundary_measure.max(1.0));
            }
        }

        #[test]
        fn contains_respects_bounding_box(x in -3.0f64..3.0, y in -3.0f64..3.0) {
            for dom in [Domain::disk(1.0).unwrap(), l_shape()] {
                if dom.contains(&[x, y]) {
                    let bb = &dom.bounding_box;
                    prop_assert!(x >= bb.lo[0] - 1e-12 && x <= bb.hi[0] + 1e-12);
                    prop_assert!(y >= bb.lo[1] - 1e-12 && y <= bb.hi[1] + 1e-12);
                }
            }
        }
    }
}
