use super::{Atom, Measure};
use crate::error::{Error, Result};
use crate::geometry::{Disk, Point2, Region};

/// Four-corner Cantor square: the top cell has side 1 and is centred at the
/// origin, each cell keeps its four corner sub-squares of relative side θ.
#[derive(Debug, Clone, PartialEq)]
pub struct CantorSquare {
    pub s: f64,
    pub generations: usize,
    pub sparseness: f64,
    pub theta: f64,
    pub mass: f64,
    /// Atoms in leaf order: atom `i` lies in level-`n` cell `i >> 2(g − n)`.
    pub measure: Measure,
}

/// Build the generation-`g` Cantor square with scale `θ = 4^{−1/s}/κ`.
pub fn make_cantor_square(s: f64, generations: usize, sparseness: f64, mass: f64) -> Result<CantorSquare> {
    if !(s > 0.0 && s <= 2.0) {
        return Err(Error::InvalidParameter(format!("dimension s = {s} outside (0, 2]")));
    }
    if !(sparseness >= 1.0) {
        return Err(Error::InvalidParameter(format!("sparseness {sparseness} < 1")));
    }
    if !(mass > 0.0) {
        return Err(Error::InvalidParameter(format!("mass {mass} must be positive")));
    }
    if generations > 12 {
        return Err(Error::InvalidParameter(format!("{generations} generations is too many atoms")));
    }
    let theta = 4f64.powf(-1.0 / s) / sparseness;
    if theta > 0.5 + 1e-15 {
        return Err(Error::InvalidParameter(format!("theta = {theta} > 1/2: cells overlap")));
    }
    let count = 1usize << (2 * generations);
    let w = mass / count as f64;
    let mut atoms = Vec::with_capacity(count);
    for i in 0..count {
        let mut c = Point2::ORIGIN;
        let mut side = 1.0;
        for level in 0..generations {
            let child = (i >> (2 * (generations - level - 1))) & 3;
            let off = 0.5 * side * (1.0 - theta);
            let sx = if child & 1 == 1 { 1.0 } else { -1.0 };
            let sy = if child & 2 == 2 { 1.0 } else { -1.0 };
            c = c + Point2::new(sx * off, sy * off);
            side *= theta;
        }
        atoms.push(Atom { at: c, weight: w });
    }
    Ok(CantorSquare { s, generations, sparseness, theta, mass, measure: Measure::Atomic(atoms) })
}

impl CantorSquare {
    pub fn atom_count(&self) -> usize {
        1 << (2 * self.generations)
    }

    pub fn atoms(&self) -> &[Atom] {
        match &self.measure {
            Measure::Atomic(a) => a,
            _ => unreachable!("Cantor squares are atomic"),
        }
    }

    pub fn side(&self, level: usize) -> f64 {
        self.theta.powi(level as i32)
    }

    pub fn cell_count(&self, level: usize) -> usize {
        1 << (2 * level)
    }

    /// Index of the level-`level` cell containing atom `i`; O(1).
    pub fn cell_of(&self, atom: usize, level: usize) -> usize {
        atom >> (2 * (self.generations - level))
    }

    pub fn cell_center(&self, level: usize, index: usize) -> Point2 {
        let mut c = Point2::ORIGIN;
        let mut side = 1.0;
        for l in 0..level {
            let child = (index >> (2 * (level - l - 1))) & 3;
            let off = 0.5 * side * (1.0 - self.theta);
            let sx = if child & 1 == 1 { 1.0 } else { -1.0 };
            let sy = if child & 2 == 2 { 1.0 } else { -1.0 };
            c = c + Point2::new(sx * off, sy * off);
            side *= self.theta;
        }
        c
    }

    pub fn cell_region(&self, level: usize, index: usize) -> Region {
        Region::Square { center: self.cell_center(level, index), half: 0.5 * self.side(level) }
    }

    /// Circumscribed disk of a cell.
    pub fn cell_disk(&self, level: usize, index: usize) -> Disk {
        Disk::new(self.cell_center(level, index), 0.5 * self.side(level) * std::f64::consts::SQRT_2)
    }

    /// Atom index range of a cell.
    pub fn cell_atoms(&self, level: usize, index: usize) -> std::ops::Range<usize> {
        let span = 1 << (2 * (self.generations - level));
        index * span..(index + 1) * span
    }

    pub fn cell_mass(&self, level: usize) -> f64 {
        self.mass / self.cell_count(level) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s2_one_generation_hits_quarter_corners() {
        let c = make_cantor_square(2.0, 1, 1.0, 1.0).unwrap();
        assert!((c.theta - 0.5).abs() < 1e-15);
        let mut pts: Vec<_> = c.atoms().iter().map(|a| (a.at.x, a.at.y)).collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(pts, vec![(-0.25, -0.25), (-0.25, 0.25), (0.25, -0.25), (0.25, 0.25)]);
    }

    #[test]
    fn zero_generations_is_one_atom() {
        let c = make_cantor_square(1.5, 0, 4.0, 2.0).unwrap();
        assert_eq!(c.atoms(), &[Atom { at: Point2::ORIGIN, weight: 2.0 }]);
    }

    #[test]
    fn overlapping_cells_rejected() {
        assert!(make_cantor_square(2.5, 1, 1.0, 1.0).is_err());
        assert!(make_cantor_square(1.5, 1, 0.5, 1.0).is_err());
    }

    #[test]
    fn sibling_gaps_exhaustive() {
        let c = make_cantor_square(1.5, 2, 4.0, 1.0).unwrap();
        assert_eq!(c.atoms().len(), 16);
        let a = c.atoms();
        // nearest distinct-cell gap at each level, by brute force over atom pairs
        for level in 1..=2 {
            let parent_side = c.side(level - 1);
            let mut gap = f64::INFINITY;
            for i in 0..a.len() {
                for j in 0..a.len() {
                    if c.cell_of(i, level - 1) == c.cell_of(j, level - 1) && c.cell_of(i, level) != c.cell_of(j, level) {
                        let d = (a[i].at - a[j].at).max_abs();
                        // atoms sit at leaf centres and the outermost leaves touch the cell edges
                        gap = gap.min(d - c.side(2));
                    }
                }
            }
            assert!(gap >= (1.0 - 2.0 * c.theta) * parent_side - 1e-12, "level {level}: {gap}");
        }
    }

    #[test]
    fn atoms_lie_in_their_cells() {
        let c = make_cantor_square(1.5, 3, 2.0, 1.0).unwrap();
        for (i, a) in c.atoms().iter().enumerate() {
            for level in 0..=3 {
                let own = c.cell_of(i, level);
                for k in 0..c.cell_count(level) {
                    assert_eq!(c.cell_region(level, k).contains(a.at), k == own);
                }
            }
        }
    }
}
