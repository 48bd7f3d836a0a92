//! Cube partition of `ℝ^d ∖ [−1/2, 1/2]^d` used at the point at infinity.
//!
//! Shell `j` is the centered cube of sidelength `3^j` cut into `3^d` cubes of
//! sidelength `3^{j−1}`, with the central one (the whole of shells `< j`)
//! removed.

use crate::error::{Error, Result};
use crate::geometry::{AxisCube, Point};

#[derive(Debug, Clone, PartialEq)]
pub struct ExteriorCube {
    pub center: Point,
    pub side: f64,
    pub shell: u32,
}

impl ExteriorCube {
    pub fn as_cube(&self) -> AxisCube {
        AxisCube::new(self.center.clone(), self.side)
    }
}

/// All exterior cubes of shells `1..=j_max`, ordered by shell then lexicographically.
pub fn exterior_cubes(d: usize, j_max: u32) -> Result<Vec<ExteriorCube>> {
    crate::error::check_dimension(d)?;
    if j_max < 1 {
        return Err(Error::InvalidParameter("j_max must be at least 1".into()));
    }
    if d > 12 || j_max > 30 {
        return Err(Error::InvalidParameter(format!(
            "exterior partition too large: d = {d}, j_max = {j_max}"
        )));
    }
    let per_shell = 3usize.pow(d as u32);
    let mut out = Vec::with_capacity((per_shell - 1) * j_max as usize);
    for shell in 1..=j_max {
        let side = 3f64.powi(shell as i32 - 1);
        for code in 0..per_shell {
            let mut c = code;
            let offsets: Vec<f64> = (0..d)
                .map(|_| {
                    let digit = (c % 3) as f64 - 1.0;
                    c /= 3;
                    digit
                })
                .collect();
            if offsets.iter().all(|&o| o == 0.0) {
                continue;
            }
            out.push(ExteriorCube {
                center: Point::new(offsets.iter().map(|o| o * side).collect()),
                side,
                shell,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_per_shell() {
        let one = exterior_cubes(3, 1).unwrap();
        assert_eq!(one.len(), 26);
        assert!(one.iter().all(|c| c.side == 1.0));
        assert_eq!(exterior_cubes(3, 2).unwrap().len(), 52);
        assert_eq!(exterior_cubes(4, 1).unwrap().len(), 80);
        assert!(exterior_cubes(3, 0).is_err());
    }

    #[test]
    fn cubes_stay_in_their_shell() {
        for c in exterior_cubes(3, 3).unwrap() {
            let half = 3f64.powi(c.shell as i32) / 2.0;
            for x in c.center.coords() {
                assert!(x.abs() + c.side / 2.0 <= half + 1e-12);
            }
            // Outside the deleted central cube of the shell.
            let inner = 3f64.powi(c.shell as i32 - 1) / 2.0;
            assert!(c
                .center
                .coords()
                .iter()
                .any(|x| x.abs() - c.side / 2.0 >= inner - 1e-12));
        }
    }

    #[test]
    fn no_overlap_across_shells() {
        let cubes = exterior_cubes(3, 3).unwrap();
        for (i, a) in cubes.iter().enumerate() {
            for b in &cubes[i + 1..] {
                let sep = a
                    .center
                    .coords()
                    .iter()
                    .zip(b.center.coords())
                    .any(|(x, y)| (x - y).abs() >= 0.5 * (a.side + b.side) - 1e-12);
                assert!(sep);
            }
        }
    }
}
