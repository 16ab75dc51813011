//! Nodal-set extraction by marching squares and length measurement, globally
//! and restricted to balls or cubes.

use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::fields::{Grid, GridKind, ScalarField};
use crate::geometry::{Ball, Cube, Point};

/// Relative size of the perturbation applied to exact node zeros.
const ZERO_PERTURBATION: f64 = 1e-14;

/// A polyline approximation of the zero set of a sampled field.
#[derive(Clone, Debug)]
pub struct NodalCurve {
    /// Segments in physical coordinates, ordered by generating cell index.
    pub segments: Vec<(Point, Point)>,
    /// Sum of segment lengths.
    pub total_length: f64,
    /// Grid the field was sampled on.
    pub grid: Grid,
    /// Perturbation added to exact node zeros, when any were present.
    pub perturbation: Option<f64>,
    /// Set when the field was identically zero and the curve is empty.
    pub degenerate: bool,
}

/// A region to measure nodal length in.
#[derive(Clone, Copy, Debug)]
pub enum Region {
    Ball(Ball),
    Cube(Cube),
}

/// Marching squares with linear zero crossings on cell edges. Saddle cells
/// (four crossings) are disambiguated by the sign of the cell-center value.
/// Polar cells are treated as physical quads. Exact node zeros are nudged to
/// a small positive value (recorded in the result); an identically zero field
/// yields an empty curve flagged as degenerate.
pub fn extract_nodal_set(u: &ScalarField) -> NodalCurve {
    let grid = *u.grid();
    let max_abs = u.max_abs();
    if max_abs == 0.0 {
        return NodalCurve {
            segments: Vec::new(),
            total_length: 0.0,
            grid,
            perturbation: None,
            degenerate: true,
        };
    }
    let pert = ZERO_PERTURBATION * max_abs;
    let mut perturbed_any = false;
    let value = |i: usize, j: usize, perturbed: &mut bool| -> f64 {
        let v = u.value_at(i, j);
        if v == 0.0 {
            *perturbed = true;
            pert
        } else {
            v
        }
    };

    let nx = grid.nx();
    let ny = grid.ny();
    let (cells_i, cells_j, wrap) = match grid.kind() {
        GridKind::Rectangle { .. } => (nx - 1, ny - 1, false),
        GridKind::Disk { .. } => (nx - 1, ny, true),
    };

    let mut segments = Vec::new();
    for ci in 0..cells_i {
        for cj in 0..cells_j {
            let j1 = if wrap { (cj + 1) % ny } else { cj + 1 };
            // corners in cyclic order
            let idx = [(ci, cj), (ci + 1, cj), (ci + 1, j1), (ci, j1)];
            let mut w = [0.0f64; 4];
            let mut p = [Point::new2(0.0, 0.0); 4];
            for (k, (i, j)) in idx.iter().enumerate() {
                w[k] = value(*i, *j, &mut perturbed_any);
                p[k] = grid.node(*i, *j);
            }
            // zero crossings on the four edges, cyclic
            let mut crossings: Vec<(usize, Point)> = Vec::with_capacity(4);
            for e in 0..4 {
                let f = (e + 1) % 4;
                if w[e] * w[f] < 0.0 {
                    let t = w[e] / (w[e] - w[f]);
                    crossings.push((
                        e,
                        Point::new2(
                            p[e].x() + t * (p[f].x() - p[e].x()),
                            p[e].y() + t * (p[f].y() - p[e].y()),
                        ),
                    ));
                }
            }
            match crossings.len() {
                2 => segments.push((crossings[0].1, crossings[1].1)),
                4 => {
                    // saddle: the cell center decides which corners connect
                    let center = (w[0] + w[1] + w[2] + w[3]) / 4.0;
                    let by_edge = |e: usize| crossings.iter().find(|(ce, _)| *ce == e).unwrap().1;
                    if center * w[0] > 0.0 {
                        segments.push((by_edge(0), by_edge(1)));
                        segments.push((by_edge(2), by_edge(3)));
                    } else {
                        segments.push((by_edge(3), by_edge(0)));
                        segments.push((by_edge(1), by_edge(2)));
                    }
                }
                _ => {}
            }
        }
    }
    segments.retain(|(a, b)| a.dist(b) > 0.0);
    let total_length = segments.iter().map(|(a, b)| a.dist(b)).sum();
    NodalCurve {
        segments,
        total_length,
        grid,
        perturbation: perturbed_any.then_some(pert),
        degenerate: false,
    }
}

/// Total length of the curve clipped exactly against the region.
pub fn length_in_region(z: &NodalCurve, region: &Region) -> f64 {
    z.segments
        .iter()
        .map(|(a, b)| match region {
            Region::Ball(ball) => clip_ball(a, b, ball),
            Region::Cube(cube) => clip_cube(a, b, cube),
        })
        .sum()
}

/// Length of the part of segment ab inside the closed ball.
fn clip_ball(a: &Point, b: &Point, ball: &Ball) -> f64 {
    let (dx, dy) = (b.x() - a.x(), b.y() - a.y());
    let (fx, fy) = (a.x() - ball.center.x(), a.y() - ball.center.y());
    let qa = dx * dx + dy * dy;
    if qa == 0.0 {
        return 0.0;
    }
    let qb = 2.0 * (fx * dx + fy * dy);
    let qc = fx * fx + fy * fy - ball.radius * ball.radius;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return 0.0;
    }
    let s = disc.sqrt();
    let t0 = ((-qb - s) / (2.0 * qa)).max(0.0);
    let t1 = ((-qb + s) / (2.0 * qa)).min(1.0);
    if t1 <= t0 {
        0.0
    } else {
        (t1 - t0) * qa.sqrt()
    }
}

/// Length of the part of segment ab inside the closed cube (Liang-Barsky).
fn clip_cube(a: &Point, b: &Point, cube: &Cube) -> f64 {
    let (dx, dy) = (b.x() - a.x(), b.y() - a.y());
    let lo = cube.min_corner();
    let (x0, y0) = (lo.x(), lo.y());
    let (x1, y1) = (x0 + cube.side, y0 + cube.side);
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    for (p, q) in [
        (-dx, a.x() - x0),
        (dx, x1 - a.x()),
        (-dy, a.y() - y0),
        (dy, y1 - a.y()),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return 0.0;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    if t1 <= t0 {
        0.0
    } else {
        (t1 - t0) * dx.hypot(dy)
    }
}

/// Nodal length of the disk Steklov eigenfunction with eigenvalue nearest k
/// (cos parity preferred implicitly by the deterministic eigensolver order;
/// both members of a multiplicity-2 pair have the same nodal length). k = 0
/// selects the constant eigenfunction, whose nodal set is empty.
pub fn nodal_length_of_eigenfunction(grid: &Grid, k: usize) -> Result<f64> {
    if !grid.is_disk() {
        return Err(Error::InvalidArgument(
            "eigenfunction nodal length requires a disk grid".into(),
        ));
    }
    if k == 0 {
        return Ok(0.0);
    }
    let pairs = crate::elliptic::steklov_spectrum(grid, 2 * k + 2)?;
    let target = k as f64;
    let mut best = 0usize;
    for (i, p) in pairs.iter().enumerate() {
        if (p.eigenvalue - target).abs() < (pairs[best].eigenvalue - target).abs() {
            best = i;
        }
    }
    let z = extract_nodal_set(&pairs[best].interior);
    Ok(z.total_length)
}

/// Write the curve as CSV: header `x1,y1,x2,y2`, one row per segment.
pub fn save_curve_csv(z: &NodalCurve, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    (|| -> std::io::Result<()> {
        writeln!(w, "x1,y1,x2,y2")?;
        for (a, b) in &z.segments {
            writeln!(w, "{},{},{},{}", a.x(), a.y(), b.x(), b.y())?;
        }
        w.flush()
    })()
    .map_err(|e| Error::io(path, e))
}

/// Render the curve over the domain outline as a standalone SVG.
pub fn save_curve_svg(z: &NodalCurve, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let (x0, y0, width, height, outline) = match z.grid.kind() {
        GridKind::Rectangle { x0, x1, y0, y1, .. } => (
            x0,
            y0,
            x1 - x0,
            y1 - y0,
            format!(
                "<rect x=\"{x0}\" y=\"{y0}\" width=\"{}\" height=\"{}\" \
                 fill=\"none\" stroke=\"black\" stroke-width=\"{}\"/>",
                x1 - x0,
                y1 - y0,
                (x1 - x0) / 400.0
            ),
        ),
        GridKind::Disk { radius, .. } => (
            -radius,
            -radius,
            2.0 * radius,
            2.0 * radius,
            format!(
                "<circle cx=\"0\" cy=\"0\" r=\"{radius}\" fill=\"none\" \
                 stroke=\"black\" stroke-width=\"{}\"/>",
                radius / 200.0
            ),
        ),
    };
    (|| -> std::io::Result<()> {
        writeln!(
            w,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"600\" \
             viewBox=\"{x0} {y0} {width} {height}\">"
        )?;
        // flip y so the mathematical orientation matches screen coordinates
        writeln!(w, "<g transform=\"scale(1,-1)\">")?;
        writeln!(w, "{outline}")?;
        let stroke = width / 400.0;
        for (a, b) in &z.segments {
            writeln!(
                w,
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"crimson\" \
                 stroke-width=\"{stroke}\"/>",
                a.x(),
                a.y(),
                b.x(),
                b.y()
            )?;
        }
        writeln!(w, "</g>")?;
        writeln!(w, "</svg>")?;
        w.flush()
    })()
    .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::FieldTag;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn circle_field(n: usize) -> ScalarField {
        let g = Grid::square(1.0, n).unwrap();
        ScalarField::from_fn(g, FieldTag::Generic, |x, y| x * x + y * y - 0.25)
    }

    #[test]
    fn linear_field_gives_straight_line() {
        let g = Grid::square(1.0, 65).unwrap();
        let u = ScalarField::from_fn(g, FieldTag::Generic, |x, _| x);
        let z = extract_nodal_set(&u);
        assert_relative_eq!(z.total_length, 2.0, epsilon = 1e-6);
        // x = 0 hits grid nodes exactly: the perturbation path is exercised
        assert!(z.perturbation.is_some());
        for (a, b) in &z.segments {
            assert!(a.x().abs() < 1e-9);
            assert!(b.x().abs() < 1e-9);
        }
    }

    #[test]
    fn circle_length() {
        let z = extract_nodal_set(&circle_field(513));
        assert_relative_eq!(z.total_length, PI, max_relative = 3e-3);
    }

    #[test]
    fn circle_length_converges_under_refinement() {
        let mut errs = Vec::new();
        for n in [129usize, 257, 513] {
            let z = extract_nodal_set(&circle_field(n));
            errs.push((z.total_length - PI).abs());
        }
        assert!(errs[0] / errs[2] >= 9.0, "errors: {errs:?}");
    }

    #[test]
    fn constant_fields() {
        let g = Grid::square(1.0, 33).unwrap();
        let one = ScalarField::from_fn(g, FieldTag::Generic, |_, _| 1.0);
        let z = extract_nodal_set(&one);
        assert!(z.segments.is_empty());
        assert_eq!(z.total_length, 0.0);
        assert!(!z.degenerate);

        let zero = ScalarField::from_fn(g, FieldTag::Generic, |_, _| 0.0);
        let z = extract_nodal_set(&zero);
        assert!(z.segments.is_empty());
        assert!(z.degenerate);
    }

    #[test]
    fn endpoints_lie_on_the_zero_set() {
        // bilinear evaluation restricted to a cell edge is the same linear
        // model used for crossings, so endpoints evaluate to ~0
        let g = Grid::square(1.0, 129).unwrap();
        let u = ScalarField::from_fn(g, FieldTag::Generic, |x, y| {
            (3.0 * x).sin() + (2.0 * y).cos() - 0.7
        });
        let z = extract_nodal_set(&u);
        assert!(!z.segments.is_empty());
        for (a, b) in &z.segments {
            for p in [a, b] {
                assert!(u.eval(p).unwrap().abs() <= 1e-9 * u.max_abs());
            }
        }
    }

    #[test]
    fn saddle_cells_respect_center_sign() {
        // u = xy has a saddle at the origin; segments must not cross the
        // quadrant with the same sign as the center value
        let g = Grid::square(1.0, 64).unwrap(); // even count: origin inside a cell
        let u = ScalarField::from_fn(g, FieldTag::Generic, |x, y| x * y + 1e-6);
        let z = extract_nodal_set(&u);
        // nodal set is approximately both axes: length ~ 4
        assert_relative_eq!(z.total_length, 4.0, max_relative = 0.05);
    }

    #[test]
    fn line_clipped_to_ball() {
        let g = Grid::square(1.0, 65).unwrap();
        let u = ScalarField::from_fn(g, FieldTag::Generic, |x, _| x);
        let z = extract_nodal_set(&u);
        let b = Region::Ball(Ball::new(Point::new2(0.0, 0.0), 0.5).unwrap());
        assert_relative_eq!(length_in_region(&z, &b), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn harmonic_diameters_clipped_to_ball() {
        let g = Grid::disk(1.0, 129, 256).unwrap();
        let u = ScalarField::from_fn(g, FieldTag::Generic, |x, y| {
            let r = x.hypot(y);
            let th = y.atan2(x);
            r.powi(3) * (3.0 * th).cos()
        });
        let z = extract_nodal_set(&u);
        for r in [0.3, 0.5] {
            let region = Region::Ball(Ball::new(Point::new2(0.0, 0.0), r).unwrap());
            assert_relative_eq!(length_in_region(&z, &region), 6.0 * r, max_relative = 0.01);
        }
    }

    #[test]
    fn disjoint_region_measures_zero() {
        let z = extract_nodal_set(&circle_field(129));
        let far = Region::Cube(Cube::new(Point::new2(0.85, 0.85), 0.2).unwrap());
        assert_eq!(length_in_region(&z, &far), 0.0);
    }

    #[test]
    fn partition_additivity() {
        let z = extract_nodal_set(&circle_field(257));
        let q = Cube::new(Point::new2(0.0, 0.0), 1.2).unwrap();
        let whole = length_in_region(&z, &Region::Cube(q));
        let parts: f64 = crate::geometry::subdivide_cube(&q, 3)
            .unwrap()
            .iter()
            .map(|sq| length_in_region(&z, &Region::Cube(*sq)))
            .sum();
        assert!((whole - parts).abs() <= 1e-9, "{whole} vs {parts}");
        assert_relative_eq!(whole, PI, max_relative = 5e-3);
    }

    #[test]
    fn eigenfunction_nodal_lengths() {
        let g = Grid::disk(1.0, 65, 128).unwrap();
        assert_eq!(nodal_length_of_eigenfunction(&g, 0).unwrap(), 0.0);
        for k in [1usize, 4] {
            let len = nodal_length_of_eigenfunction(&g, k).unwrap();
            assert_relative_eq!(len, 2.0 * k as f64, max_relative = 0.02);
        }
    }

    #[test]
    fn eigenfunction_requires_disk() {
        let g = Grid::square(1.0, 33).unwrap();
        assert!(nodal_length_of_eigenfunction(&g, 1).is_err());
    }

    #[test]
    fn csv_and_svg_are_deterministic() {
        let z = extract_nodal_set(&circle_field(65));
        let dir = tempfile::tempdir().unwrap();
        let csv1 = dir.path().join("a.csv");
        let csv2 = dir.path().join("b.csv");
        save_curve_csv(&z, &csv1).unwrap();
        save_curve_csv(&z, &csv2).unwrap();
        let b1 = std::fs::read(&csv1).unwrap();
        assert_eq!(b1, std::fs::read(&csv2).unwrap());
        let text = String::from_utf8(b1).unwrap();
        assert!(text.starts_with("x1,y1,x2,y2\n"));
        assert_eq!(text.lines().count(), z.segments.len() + 1);

        let svg = dir.path().join("a.svg");
        save_curve_svg(&z, &svg).unwrap();
        let svg_text = std::fs::read_to_string(&svg).unwrap();
        assert!(svg_text.contains("<circle") || svg_text.contains("<rect"));
        assert_eq!(
            svg_text.matches("<line").count(),
            z.segments.len()
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn random_lines_match_analytic_chord(
            a in -1.0f64..1.0,
            b in -1.0f64..1.0,
            c in -0.3f64..0.3,
        ) {
            prop_assume!(a.abs() + b.abs() > 0.2);
            let g = Grid::square(1.0, 129).unwrap();
            let u = ScalarField::from_fn(g, FieldTag::Generic, |x, y| a * x + b * y + c);
            let z = extract_nodal_set(&u);
            // analytic chord of the line a x + b y + c = 0 in [-1, 1]^2
            let mut pts: Vec<(f64, f64)> = Vec::new();
            for x in [-1.0f64, 1.0] {
                if b.abs() > 1e-12 {
                    let y = -(a * x + c) / b;
                    if (-1.0..=1.0).contains(&y) {
                        pts.push((x, y));
                    }
                }
            }
            for y in [-1.0f64, 1.0] {
                if a.abs() > 1e-12 {
                    let x = -(b * y + c) / a;
                    if (-1.0..=1.0).contains(&x) {
                        pts.push((x, y));
                    }
                }
            }
            let mut chord = 0.0f64;
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    let d = (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1);
                    chord = chord.max(d);
                }
            }
            prop_assert!((z.total_length - chord).abs() <= 1e-6 * (1.0 + chord),
                "length {} vs chord {chord}", z.total_length);
        }
    }
}
