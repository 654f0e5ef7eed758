use super::vec3::{Dir3, Point3, Vec3};
use serde::{Deserialize, Serialize};

/// Half-open parametric ray `origin + t * dir`, `t in [t_min, t_max]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ray {
    pub origin: Point3,
    pub dir: Dir3,
    pub t_min: f64,
    pub t_max: f64,
}

impl Ray {
    pub fn new(origin: Point3, dir: Dir3) -> Ray {
        Ray {
            origin,
            dir,
            t_min: 0.0,
            t_max: f64::INFINITY,
        }
    }

    pub fn with_range(origin: Point3, dir: Dir3, t_min: f64, t_max: f64) -> Ray {
        debug_assert!(t_min >= 0.0 && t_max > t_min);
        Ray {
            origin,
            dir,
            t_min,
            t_max,
        }
    }

    #[inline]
    pub fn at(&self, t: f64) -> Point3 {
        self.origin + self.dir.get() * t
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Material {
    Diffuse { albedo: f64 },
    Mirror,
}

impl Material {
    pub fn is_mirror(&self) -> bool {
        matches!(self, Material::Mirror)
    }

    /// Lambertian albedo; zero for mirrors.
    pub fn albedo(&self) -> f64 {
        match *self {
            Material::Diffuse { albedo } => albedo,
            Material::Mirror => 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Shape {
    /// Axis-aligned box.
    Box {
        min: Point3,
        max: Point3,
    },
    /// Finite capped cylinder; `base` is the center of the bottom cap.
    Cylinder {
        base: Point3,
        axis: Dir3,
        radius: f64,
        height: f64,
    },
    Sphere {
        center: Point3,
        radius: f64,
    },
    /// Two-sided rectangle spanned by `u_axis` and `normal x u_axis`.
    Panel {
        center: Point3,
        normal: Dir3,
        u_axis: Dir3,
        half_u: f64,
        half_v: f64,
    },
}

/// Parametric extent of a ray inside a convex solid, with the outward
/// surface normals at entry and exit.
#[derive(Clone, Copy, Debug)]
pub struct Span {
    pub t0: f64,
    pub n0: Vec3,
    pub t1: f64,
    pub n1: Vec3,
}

impl Shape {
    pub fn validate(&self) -> Result<(), String> {
        let finite = |v: Vec3| v.is_finite();
        match *self {
            Shape::Box { min, max } => {
                if !(finite(min) && finite(max)) {
                    return Err("box corners must be finite".into());
                }
                if !(max.x > min.x && max.y > min.y && max.z > min.z) {
                    return Err(format!("box extents must be positive: {min:?} .. {max:?}"));
                }
            }
            Shape::Cylinder {
                base,
                radius,
                height,
                ..
            } => {
                if !finite(base) || !(radius > 0.0 && height > 0.0) {
                    return Err("cylinder radius and height must be positive".into());
                }
            }
            Shape::Sphere { center, radius } => {
                if !finite(center) || !(radius > 0.0) {
                    return Err("sphere radius must be positive".into());
                }
            }
            Shape::Panel {
                center,
                normal,
                u_axis,
                half_u,
                half_v,
            } => {
                if !finite(center) || !(half_u > 0.0 && half_v > 0.0) {
                    return Err("panel half extents must be positive".into());
                }
                if normal.dot(u_axis.get()).abs() > 1e-9 {
                    return Err("panel u axis must be perpendicular to its normal".into());
                }
            }
        }
        Ok(())
    }

    /// Axis-aligned bounds.
    pub fn bounds(&self) -> (Point3, Point3) {
        match *self {
            Shape::Box { min, max } => (min, max),
            Shape::Sphere { center, radius } => {
                let r = Vec3::new(radius, radius, radius);
                (center - r, center + r)
            }
            Shape::Cylinder {
                base,
                axis,
                radius,
                height,
            } => {
                let top = base + axis.get() * height;
                let a = axis.get();
                // Disc extent along each world axis is r * sqrt(1 - a_k^2).
                let e = Vec3::new(
                    radius * (1.0 - a.x * a.x).max(0.0).sqrt(),
                    radius * (1.0 - a.y * a.y).max(0.0).sqrt(),
                    radius * (1.0 - a.z * a.z).max(0.0).sqrt(),
                );
                (base.min(top) - e, base.max(top) + e)
            }
            Shape::Panel {
                center,
                normal,
                u_axis,
                half_u,
                half_v,
            } => {
                let v_axis = normal.cross(u_axis.get());
                let e = u_axis.get().abs() * half_u + v_axis.abs() * half_v;
                (center - e, center + e)
            }
        }
    }

    /// Closed-solid membership. Panels have no interior.
    pub fn contains(&self, p: Point3) -> bool {
        match *self {
            Shape::Box { min, max } => {
                p.x >= min.x
                    && p.x <= max.x
                    && p.y >= min.y
                    && p.y <= max.y
                    && p.z >= min.z
                    && p.z <= max.z
            }
            Shape::Sphere { center, radius } => (p - center).norm_squared() <= radius * radius,
            Shape::Cylinder {
                base,
                axis,
                radius,
                height,
            } => {
                let w = p - base;
                let s = w.dot(axis.get());
                let radial = w - axis.get() * s;
                (0.0..=height).contains(&s) && radial.norm_squared() <= radius * radius
            }
            Shape::Panel { .. } => false,
        }
    }

    /// Interval of `t` along `origin + t dir` spent inside the solid, or the
    /// single crossing for a panel (`t0 == t1`). `None` on a miss.
    pub fn span(&self, origin: Point3, dir: Vec3) -> Option<Span> {
        match *self {
            Shape::Box { min, max } => box_span(min, max, origin, dir),
            Shape::Sphere { center, radius } => sphere_span(center, radius, origin, dir),
            Shape::Cylinder {
                base,
                axis,
                radius,
                height,
            } => cylinder_span(base, axis.get(), radius, height, origin, dir),
            Shape::Panel {
                center,
                normal,
                u_axis,
                half_u,
                half_v,
            } => {
                let n = normal.get();
                let denom = dir.dot(n);
                if denom.abs() < 1e-15 {
                    return None;
                }
                let t = (center - origin).dot(n) / denom;
                let p = origin + dir * t;
                let local = p - center;
                let v_axis = n.cross(u_axis.get());
                if local.dot(u_axis.get()).abs() > half_u || local.dot(v_axis).abs() > half_v {
                    return None;
                }
                Some(Span {
                    t0: t,
                    n0: n,
                    t1: t,
                    n1: n,
                })
            }
        }
    }
}

fn box_span(min: Point3, max: Point3, o: Point3, d: Vec3) -> Option<Span> {
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    let mut n0 = Vec3::ZERO;
    let mut n1 = Vec3::ZERO;
    for k in 0..3 {
        let (lo, hi, ok, dk) = (min[k], max[k], o[k], d[k]);
        if dk == 0.0 {
            if ok < lo || ok > hi {
                return None;
            }
            continue;
        }
        let (mut ta, mut tb) = ((lo - ok) / dk, (hi - ok) / dk);
        let unit = Vec3::ZERO.with_axis(k, 1.0);
        let (mut na, mut nb) = (-unit, unit);
        if ta > tb {
            std::mem::swap(&mut ta, &mut tb);
            std::mem::swap(&mut na, &mut nb);
        }
        if ta > t0 {
            t0 = ta;
            n0 = na;
        }
        if tb < t1 {
            t1 = tb;
            n1 = nb;
        }
        if t0 > t1 {
            return None;
        }
    }
    Some(Span { t0, n0, t1, n1 })
}

fn sphere_span(c: Point3, r: f64, o: Point3, d: Vec3) -> Option<Span> {
    let oc = o - c;
    let b = oc.dot(d);
    let cc = oc.norm_squared() - r * r;
    let disc = b * b - cc;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // Numerically stable root pair.
    let q = if b > 0.0 { -b - sq } else { -b + sq };
    let (mut t0, mut t1) = (q, if q != 0.0 { cc / q } else { 0.0 });
    if t0 > t1 {
        std::mem::swap(&mut t0, &mut t1);
    }
    let n0 = (o + d * t0 - c) / r;
    let n1 = (o + d * t1 - c) / r;
    Some(Span { t0, n0, t1, n1 })
}

fn cylinder_span(base: Point3, a: Vec3, r: f64, h: f64, o: Point3, d: Vec3) -> Option<Span> {
    let w = o - base;
    let da = d.dot(a);
    let wa = w.dot(a);
    // Radial components.
    let dr = d - a * da;
    let wr = w - a * wa;

    let (mut t0, mut n0, mut t1, mut n1);
    let qa = dr.norm_squared();
    if qa < 1e-18 {
        if wr.norm_squared() > r * r {
            return None;
        }
        t0 = f64::NEG_INFINITY;
        t1 = f64::INFINITY;
        n0 = Vec3::ZERO;
        n1 = Vec3::ZERO;
    } else {
        let qb = wr.dot(dr);
        let qc = wr.norm_squared() - r * r;
        let disc = qb * qb - qa * qc;
        if disc < 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        let q = if qb > 0.0 { -qb - sq } else { -qb + sq };
        let (mut ta, mut tb) = (q / qa, if q != 0.0 { qc / q } else { 0.0 });
        if ta > tb {
            std::mem::swap(&mut ta, &mut tb);
        }
        t0 = ta;
        t1 = tb;
        let radial_normal = |t: f64| {
            let p = w + d * t;
            (p - a * p.dot(a)) / r
        };
        n0 = radial_normal(t0);
        n1 = radial_normal(t1);
    }

    // Clip against the cap slab 0 <= s <= h.
    if da == 0.0 {
        if wa < 0.0 || wa > h {
            return None;
        }
    } else {
        let (mut sa, mut sb) = ((0.0 - wa) / da, (h - wa) / da);
        let (mut na, mut nb) = (-a, a);
        if sa > sb {
            std::mem::swap(&mut sa, &mut sb);
            std::mem::swap(&mut na, &mut nb);
        }
        if sa > t0 {
            t0 = sa;
            n0 = na;
        }
        if sb < t1 {
            t1 = sb;
            n1 = nb;
        }
    }
    if t0 > t1 {
        return None;
    }
    Some(Span { t0, n0, t1, n1 })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    pub shape: Shape,
    pub material: Material,
}

impl Primitive {
    pub fn new(shape: Shape, material: Material) -> Primitive {
        Primitive { shape, material }
    }

    pub fn diffuse_box(min: Point3, max: Point3, albedo: f64) -> Primitive {
        Primitive::new(Shape::Box { min, max }, Material::Diffuse { albedo })
    }

    pub fn validate(&self) -> Result<(), String> {
        self.shape.validate()?;
        if let Material::Diffuse { albedo } = self.material {
            if !(albedo > 0.0 && albedo <= 1.0) {
                return Err(format!("albedo {albedo} outside (0, 1]"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_span_through_center() {
        let s = box_span(
            Vec3::new(-1.0, -1.0, 1.0),
            Vec3::new(1.0, 1.0, 2.0),
            Vec3::ZERO,
            Vec3::Z,
        )
        .unwrap();
        assert_eq!(s.t0, 1.0);
        assert_eq!(s.t1, 2.0);
        assert_eq!(s.n0, -Vec3::Z);
        assert_eq!(s.n1, Vec3::Z);
    }

    #[test]
    fn cylinder_along_axis_hits_cap() {
        let s = cylinder_span(
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::Z,
            0.5,
            2.0,
            Vec3::ZERO,
            Vec3::Z,
        )
        .unwrap();
        assert!((s.t0 - 1.0).abs() < 1e-12);
        assert!((s.t1 - 3.0).abs() < 1e-12);
        assert_eq!(s.n0, -Vec3::Z);
    }

    #[test]
    fn cylinder_side_hit() {
        let o = Vec3::new(-3.0, 0.0, 1.0);
        let s = cylinder_span(Vec3::ZERO, Vec3::Z, 0.5, 2.0, o, Vec3::X).unwrap();
        assert!((s.t0 - 2.5).abs() < 1e-12);
        assert!((s.n0 - -Vec3::X).norm() < 1e-12);
        assert!(cylinder_span(
            Vec3::ZERO,
            Vec3::Z,
            0.5,
            2.0,
            Vec3::new(-3.0, 0.0, 2.5),
            Vec3::X
        )
        .is_none());
    }

    #[test]
    fn sphere_span_roots() {
        let s = sphere_span(Vec3::new(0.0, 0.0, 5.0), 1.0, Vec3::ZERO, Vec3::Z).unwrap();
        assert!((s.t0 - 4.0).abs() < 1e-12 && (s.t1 - 6.0).abs() < 1e-12);
    }

    #[test]
    fn cylinder_bounds_tilted() {
        let axis = Dir3::new(Vec3::new(1.0, 1.0, 0.0)).unwrap();
        let shape = Shape::Cylinder {
            base: Vec3::ZERO,
            axis,
            radius: 0.2,
            height: 1.0,
        };
        let (lo, hi) = shape.bounds();
        for i in 0..200 {
            let phi = i as f64 * 0.0314159;
            let r = Dir3::new(Vec3::new(1.0, -1.0, 0.0)).unwrap().get() * phi.cos()
                + Vec3::Z * phi.sin();
            for s in [0.0, 1.0] {
                let p = axis.get() * s + r * 0.2;
                assert!(p.x >= lo.x - 1e-12 && p.x <= hi.x + 1e-12);
                assert!(p.z >= lo.z - 1e-12 && p.z <= hi.z + 1e-12);
            }
        }
    }
}
