use crate::geometry::Polytope;
use crate::{Error, Point, Result};

/// Affine map `x = J x̂ + t` from `(-1, 1)^d` onto an element's bounding box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundingBoxMap {
    pub dim: usize,
    /// Half extents (the diagonal of `J`); unused components are one.
    pub scale: Point,
    /// Box centre.
    pub translation: Point,
    /// `|J|`.
    pub det: f64,
}

pub fn bounding_box(p: &Polytope) -> Result<BoundingBoxMap> {
    let (lo, hi) = p.bounds();
    let d = p.dim();
    let mut scale = Point::repeat(1.0);
    let mut translation = Point::zeros();
    let mut det = 1.0;
    for k in 0..d {
        let h = 0.5 * (hi[k] - lo[k]);
        if h.is_nan() || h <= 0.0 {
            return Err(Error::DegenerateBox { axis: k });
        }
        scale[k] = h;
        translation[k] = 0.5 * (hi[k] + lo[k]);
        det *= h;
    }
    Ok(BoundingBoxMap {
        dim: d,
        scale,
        translation,
        det,
    })
}

impl BoundingBoxMap {
    pub fn to_reference(&self, x: &Point) -> Point {
        let mut y = Point::zeros();
        for k in 0..self.dim {
            y[k] = (x[k] - self.translation[k]) / self.scale[k];
        }
        y
    }

    pub fn to_physical(&self, xh: &Point) -> Point {
        let mut y = Point::zeros();
        for k in 0..self.dim {
            y[k] = self.scale[k] * xh[k] + self.translation[k];
        }
        y
    }

    /// `J⁻¹ b`.
    pub fn scale_wind(&self, b: &Point) -> Point {
        let mut y = Point::zeros();
        for k in 0..self.dim {
            y[k] = b[k] / self.scale[k];
        }
        y
    }

    /// The element expressed in reference coordinates.
    pub fn map_polytope(&self, p: &Polytope) -> Polytope {
        p.map_points(|x| self.to_reference(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shapes::*;

    #[test]
    fn examples() {
        let m = bounding_box(&hypercube(2).unwrap()).unwrap();
        assert_eq!(m.det, 1.0);
        assert_eq!(
            m.to_reference(&Point::new(0.3, -0.2, 0.0)),
            Point::new(0.3, -0.2, 0.0)
        );
        let t = Polytope::polygon(&[[0.0, 0.0], [2.0, 0.0], [0.0, 4.0]]).unwrap();
        let m = bounding_box(&t).unwrap();
        assert_eq!((m.scale.x, m.scale.y), (1.0, 2.0));
        assert_eq!((m.translation.x, m.translation.y), (1.0, 2.0));
        assert_eq!(m.det, 2.0);
    }

    #[test]
    fn mapped_element_inside_reference_box() {
        for p in [
            regular_polygon(7).unwrap(),
            pyramid(5).unwrap(),
            prism(4).unwrap(),
        ] {
            let m = bounding_box(&p).unwrap();
            let q = m.map_polytope(&p);
            for v in q.vertices() {
                for k in 0..p.dim() {
                    assert!(v[k].abs() <= 1.0 + 1e-15);
                }
            }
            assert!((q.measure() * m.det - p.measure()).abs() < 1e-13);
        }
    }
}
