//! Bottom cover, the `N`-level Cantor structure, the rarefied measure `μ′`
//! and the partial potentials `R⁽ⁿ⁾μ′`, `R̃`.

use crate::error::{Error, Result};
use crate::geometry::{Disk, Point2, Region};
use crate::measure::{Atom, CantorSquare, Measure};
use crate::params::ConstructionParams;
use crate::riesz::{kernel, transform_direct};
use crate::topcover::{build_top_cover, first_containing};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

/// Knobs of the recursion that the construction leaves open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    /// Halvings of `t₀` tried below `ρ*`.
    pub t0_depth: usize,
    /// Steps `t_j = (1−3ε)^j t₀` tried before giving up.
    pub annulus_depth: usize,
    /// A cell must pass at least this fraction of its mass to its children.
    pub min_kept: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions { t0_depth: 40, annulus_depth: 2000, min_kept: 0.5 }
    }
}

/// Radial mass profile of a point set around a centre.
struct Radial {
    dist: Vec<f64>,
    cum: Vec<f64>,
}

impl Radial {
    fn new(atoms: &[Atom], x: Point2) -> Self {
        let mut d: Vec<(f64, f64)> = atoms.iter().map(|a| (a.at.dist(x), a.weight)).collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut cum = Vec::with_capacity(d.len());
        let mut acc = 0.0;
        for &(_, w) in &d {
            acc += w;
            cum.push(acc);
        }
        Radial { dist: d.into_iter().map(|p| p.0).collect(), cum }
    }

    /// Mass of the closed disk of radius `r`.
    fn mass(&self, r: f64) -> f64 {
        let k = self.dist.partition_point(|&d| d <= r);
        if k == 0 {
            0.0
        } else {
            self.cum[k - 1]
        }
    }
}

/// Output of [`select_rho`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhoChoice {
    pub rho: f64,
    pub k: usize,
    pub t0: f64,
    /// `μ(D(x, Mρ)) / (2 M^s δ ρ^s)`, at most 1.
    pub growth_ratio: f64,
}

fn select_rho_atoms(atoms: &[Atom], x: Point2, p: &ConstructionParams, rho_star: f64, opts: &BuildOptions) -> Result<RhoChoice> {
    let radial = Radial::new(atoms, x);
    let mut t0 = None;
    let mut t = 0.5 * rho_star;
    for _ in 0..opts.t0_depth {
        if radial.mass(p.big_m * t) <= p.delta * t.powf(p.s) {
            t0 = Some(t);
            break;
        }
        t *= 0.5;
    }
    let t0 = t0.ok_or(Error::NoStartingRadius)?;
    let q = 1.0 - 3.0 * p.epsilon;
    let mut tk = t0;
    for k in 0..opts.annulus_depth {
        let inner = radial.mass(tk);
        let next = tk * q;
        // open inner disk: the annulus is D(x,t_k) minus D(x,t_{k+1})
        let shell = inner - radial.mass(next);
        if shell <= 6.0 * p.epsilon * inner {
            let big = radial.mass(p.big_m * tk);
            let ratio = big / (2.0 * p.big_m.powf(p.s) * p.delta * tk.powf(p.s));
            if ratio > 1.0 + 1e-12 {
                return Err(Error::Precondition(format!("growth check failed at rho = {tk:e}: ratio {ratio}")));
            }
            return Ok(RhoChoice { rho: tk, k, t0, growth_ratio: ratio });
        }
        tk = next;
    }
    Err(Error::DepthExhausted(opts.annulus_depth))
}

/// `ρ(x) = t_k`, `k` the first index with `μ(D(x,t_k)∖D(x,t_{k+1})) ≤ 6ε μ(D(x,t_k))`,
/// `t₀` the first dyadic radius below `ρ*` with `μ(D(x, M t₀)) ≤ δ t₀^s`.
pub fn select_rho(mu: &Measure, x: Point2, params: &ConstructionParams) -> Result<RhoChoice> {
    select_rho_atoms(&mu.as_atoms(), x, params, params.rho_star, &BuildOptions::default())
}

/// Greedy Besicovitch-type selection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    /// Selected disks, radii non-increasing.
    pub disks: Vec<Disk>,
    /// Index of each selected disk in the candidate list.
    pub chosen: Vec<usize>,
    /// Largest number of selected disks sharing a point (sampled at centres).
    pub covering_number: usize,
}

/// Largest radius first; a candidate is kept when its centre is not yet covered.
pub fn besicovitch_select(candidates: &[Disk]) -> Selection {
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| candidates[b].radius.total_cmp(&candidates[a].radius).then(a.cmp(&b)));
    let mut disks: Vec<Disk> = Vec::new();
    let mut chosen = Vec::new();
    for i in order {
        let c = candidates[i];
        if disks.iter().all(|d| !d.contains(c.center)) {
            disks.push(c);
            chosen.push(i);
        }
    }
    let covering_number = candidates
        .iter()
        .map(|c| disks.iter().filter(|d| d.contains(c.center)).count())
        .max()
        .unwrap_or(0);
    Selection { disks, chosen, covering_number }
}

/// One first-generation cell of a bottom cover.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BottomCell {
    /// `B_j`.
    pub ball: Disk,
    /// `Ω_j`, the `ερ_j`-neighbourhood of `B̃_j = (1−3ε)B_j ∖ ∪_{i<j} B_i`.
    pub region: Region,
    /// `Ω̃_j`, a disk of radius `ερ_j` inside `Ω_j`.
    pub inner: Disk,
    /// `μ(B̃_j)`.
    pub mass: f64,
    /// Indices (into the input atoms) of the atoms in `B̃_j`.
    pub atoms: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BottomCover {
    pub cells: Vec<BottomCell>,
    pub covering_number: usize,
    /// Mass of the atoms lying in some `B_j`.
    pub covered_mass: f64,
    /// Total minus `Σ μ(B̃_j)`: bad points, thin rims and uncovered atoms.
    pub exceptional_mass: f64,
    /// Atoms for which no radius could be selected.
    pub bad_points: usize,
}

/// Point of `B̃` farthest from its boundary, found on a 24×24 grid over
/// `(1−3ε)B`; falls back to an atom of `B̃`.
fn deepest_point(outer: Disk, removed: &[Disk], fallback: Point2) -> Point2 {
    let depth = |p: Point2| {
        let mut d = outer.radius - p.dist(outer.center);
        for r in removed {
            d = d.min(p.dist(r.center) - r.radius);
        }
        d
    };
    let mut best = (depth(fallback), fallback);
    let n = 24;
    for j in 0..n {
        for i in 0..n {
            let p = outer.center
                + Point2::new(
                    (2.0 * (i as f64 + 0.5) / n as f64 - 1.0) * outer.radius,
                    (2.0 * (j as f64 + 0.5) / n as f64 - 1.0) * outer.radius,
                );
            let d = depth(p);
            if d > best.0 {
                best = (d, p);
            }
        }
    }
    best.1
}

fn bottom_cover_atoms(atoms: &[Atom], p: &ConstructionParams, rho_star: f64, opts: &BuildOptions) -> BottomCover {
    let choices: Vec<Option<f64>> = atoms
        .par_iter()
        .map(|a| if a.weight > 0.0 { select_rho_atoms(atoms, a.at, p, rho_star, opts).ok().map(|c| c.rho) } else { None })
        .collect();
    let bad_points = choices.iter().zip(atoms).filter(|(c, a)| c.is_none() && a.weight > 0.0).count();
    let candidates: Vec<Disk> =
        choices.iter().zip(atoms).filter_map(|(c, a)| c.map(|r| Disk::new(a.at, r))).collect();
    let sel = besicovitch_select(&candidates);
    let total: f64 = atoms.iter().map(|a| a.weight).sum();
    let covered_mass = atoms.iter().filter(|a| sel.disks.iter().any(|d| d.contains(a.at))).map(|a| a.weight).sum();
    let q = 1.0 - 3.0 * p.epsilon;
    let mut taken = vec![false; atoms.len()];
    let mut cells = Vec::new();
    for (j, b) in sel.disks.iter().enumerate() {
        let shrunk = Disk::new(b.center, q * b.radius);
        let earlier = &sel.disks[..j];
        let members: Vec<usize> = (0..atoms.len())
            .filter(|&i| !taken[i] && shrunk.contains(atoms[i].at) && earlier.iter().all(|d| !d.contains(atoms[i].at)))
            .collect();
        for &i in &members {
            taken[i] = true;
        }
        let mass: f64 = members.iter().map(|&i| atoms[i].weight).sum();
        if members.is_empty() || mass <= 0.0 {
            continue;
        }
        let pad = p.epsilon * b.radius;
        let centre = deepest_point(shrunk, earlier, atoms[members[0]].at);
        cells.push(BottomCell {
            ball: *b,
            region: Region::Carved { outer: shrunk, removed: earlier.to_vec(), pad },
            inner: Disk::new(centre, pad),
            mass,
            atoms: members,
        });
    }
    let kept: f64 = cells.iter().map(|c| c.mass).sum();
    BottomCover { cells, covering_number: sel.covering_number, covered_mass, exceptional_mass: total - kept, bad_points }
}

/// Bottom cover of `μ` with the radius bound `ρ*` of `params`.
pub fn build_bottom_cover(mu: &Measure, params: &ConstructionParams) -> BottomCover {
    bottom_cover_atoms(&mu.as_atoms(), params, params.rho_star, &BuildOptions::default())
}

/// One Cantor cell `Q_j⁽ⁿ⁾`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureCell {
    pub level: usize,
    pub parent: Option<usize>,
    /// `None` for the whole plane.
    pub region: Option<Region>,
    /// Disk of the bottom cover that gave birth to the cell.
    pub ball: Option<Disk>,
    /// `Ω̃`, the disk carrying the mollifying cap.
    pub inner: Option<Disk>,
    /// `μ_j⁽ⁿ⁾(ℝ²)`.
    pub mass: f64,
    pub m: f64,
    #[serde(rename = "H")]
    pub h: f64,
    /// Indices into [`CantorStructure::mu`] of the atoms of `μ_j⁽ⁿ⁾`.
    pub atoms: Vec<usize>,
}

impl StructureCell {
    pub fn contains(&self, p: Point2) -> bool {
        self.region.as_ref().is_none_or(|r| r.contains(p))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CantorStructure {
    pub s: f64,
    pub epsilon: f64,
    pub big_m: f64,
    pub delta: f64,
    /// The original measure as atoms.
    pub mu: Vec<Atom>,
    /// `levels[n]` holds the cells of generation `n`; `levels[0]` is the plane.
    pub levels: Vec<Vec<StructureCell>>,
    /// Indices into `mu` of the atoms of `μ′`.
    pub prime: Vec<usize>,
    /// `membership[a][n]`: cell of generation `n` holding the `a`-th atom of `μ′`.
    pub membership: Vec<Vec<usize>>,
    /// Mass lost between consecutive generations.
    pub exceptional: Vec<f64>,
}

/// Per-atom stand-in for `𝓗^s`: each top-cover disk shares `r_j^s` among
/// the atoms of `T̃_j` in proportion to their weight.
fn atom_content(atoms: &[Atom], p: &ConstructionParams) -> Result<Vec<f64>> {
    let cover = build_top_cover(&Measure::Atomic(atoms.to_vec()), p.s, p.r_star, 0.5 * p.budget, p.epsilon)?;
    let masses = cover.tilde_masses(atoms);
    Ok(atoms
        .iter()
        .map(|a| match first_containing(&cover.disks, a.at) {
            Some(j) if masses[j] > 0.0 => cover.disks[j].radius.powf(p.s) * a.weight / masses[j],
            _ => 0.0,
        })
        .collect())
}

fn min_gap(own: &[Atom], others: &[&[Atom]]) -> f64 {
    let mut g = f64::INFINITY;
    for o in others {
        for a in own {
            for b in o.iter() {
                g = g.min(a.at.dist(b.at));
            }
        }
    }
    g
}

/// `N`-level recursion: each cell is split by a bottom cover of its measure,
/// with `ρ*` shrunk so that `Mρ*` stays below half the distance to sibling cells.
pub fn build_structure(mu: &Measure, params: &ConstructionParams, opts: &BuildOptions) -> Result<CantorStructure> {
    params.validate()?;
    let atoms: Vec<Atom> = mu.as_atoms().into_iter().filter(|a| a.weight > 0.0).collect();
    if atoms.is_empty() {
        return Err(Error::InvalidParameter("empty measure".into()));
    }
    let content = atom_content(&atoms, params)?;
    let total: f64 = atoms.iter().map(|a| a.weight).sum();
    let root = StructureCell {
        level: 0,
        parent: None,
        region: None,
        ball: None,
        inner: None,
        mass: total,
        m: params.m,
        h: params.budget,
        atoms: (0..atoms.len()).collect(),
    };
    let mut levels = vec![vec![root]];
    let mut exceptional = vec![0.0];
    for n in 0..params.levels {
        let parents = &levels[n];
        let local: Vec<Vec<Atom>> = parents.iter().map(|c| c.atoms.iter().map(|&i| atoms[i]).collect()).collect();
        let children: Vec<Result<Vec<StructureCell>>> = (0..parents.len())
            .into_par_iter()
            .map(|pi| {
                let others: Vec<&[Atom]> = (0..parents.len()).filter(|&k| k != pi).map(|k| local[k].as_slice()).collect();
                let gap = min_gap(&local[pi], &others);
                let rho_star = params.rho_star.min(0.5 * gap / params.big_m);
                let bc = bottom_cover_atoms(&local[pi], params, rho_star, opts);
                let kept: f64 = bc.cells.iter().map(|c| c.mass).sum();
                let parent = &parents[pi];
                if kept < opts.min_kept * parent.mass {
                    return Err(Error::Degenerate { kept: kept / parent.mass, required: opts.min_kept });
                }
                Ok(bc
                    .cells
                    .into_iter()
                    .map(|c| {
                        let ids: Vec<usize> = c.atoms.iter().map(|&k| parent.atoms[k]).collect();
                        let h = 2.0 * ids.iter().map(|&i| content[i]).sum::<f64>();
                        StructureCell {
                            level: n + 1,
                            parent: Some(pi),
                            region: Some(c.region),
                            ball: Some(c.ball),
                            inner: Some(c.inner),
                            mass: c.mass,
                            m: 0.5 * c.mass,
                            h,
                            atoms: ids,
                        }
                    })
                    .collect())
            })
            .collect();
        let mut next = Vec::new();
        for c in children {
            next.extend(c?);
        }
        let lost = parents.iter().map(|c| c.mass).sum::<f64>() - next.iter().map(|c| c.mass).sum::<f64>();
        exceptional.push(lost);
        levels.push(next);
    }
    Ok(finish(params.s, params.epsilon, params.big_m, params.delta, atoms, levels, exceptional))
}

fn finish(
    s: f64,
    epsilon: f64,
    big_m: f64,
    delta: f64,
    mu: Vec<Atom>,
    levels: Vec<Vec<StructureCell>>,
    exceptional: Vec<f64>,
) -> CantorStructure {
    let depth = levels.len();
    let mut owner: Vec<Vec<Option<usize>>> = vec![vec![None; depth]; mu.len()];
    for (n, cells) in levels.iter().enumerate() {
        for (j, c) in cells.iter().enumerate() {
            for &a in &c.atoms {
                owner[a][n] = Some(j);
            }
        }
    }
    let mut prime = Vec::new();
    let mut membership = Vec::new();
    for (a, o) in owner.iter().enumerate() {
        if o.iter().all(|c| c.is_some()) {
            prime.push(a);
            membership.push(o.iter().map(|c| c.expect("checked")).collect());
        }
    }
    CantorStructure { s, epsilon, big_m, delta, mu, levels, prime, membership, exceptional }
}

/// Structure whose generation-`n` cells are the generation-`n` squares of a
/// Cantor square. Birth disks are the circumscribed disks scaled by
/// `1/(1−3ε)`, `Ω̃` the disk of radius `ερ` at the cell centre, `m = μ(cell)/2`
/// and `H = 2 Σ r^s` over the circumscribed disks of the leaf squares inside.
pub fn aligned_structure(square: &CantorSquare, levels: usize, epsilon: f64, big_m: f64, delta: f64) -> Result<CantorStructure> {
    if levels > square.generations {
        return Err(Error::InvalidParameter(format!("{levels} levels exceed {} generations", square.generations)));
    }
    if !(epsilon > 0.0 && epsilon < 1.0 / 3.0) {
        return Err(Error::InvalidParameter(format!("epsilon = {epsilon} outside (0, 1/3)")));
    }
    let s = square.s;
    let atoms = square.atoms().to_vec();
    let leaf = (0.5 * square.side(square.generations) * std::f64::consts::SQRT_2).powf(s);
    let mut out = Vec::new();
    for n in 0..=levels {
        let cells: Vec<StructureCell> = (0..square.cell_count(n))
            .map(|j| {
                let ids: Vec<usize> = square.cell_atoms(n, j).collect();
                let mass: f64 = ids.iter().map(|&i| atoms[i].weight).sum();
                let h = 2.0 * leaf * ids.len() as f64;
                if n == 0 {
                    return StructureCell { level: 0, parent: None, region: None, ball: None, inner: None, mass, m: 0.5 * mass, h, atoms: ids };
                }
                let circ = square.cell_disk(n, j);
                let ball = Disk::new(circ.center, circ.radius / (1.0 - 3.0 * epsilon));
                StructureCell {
                    level: n,
                    parent: Some(j >> 2),
                    region: Some(square.cell_region(n, j)),
                    ball: Some(ball),
                    inner: Some(Disk::new(circ.center, epsilon * ball.radius)),
                    mass,
                    m: 0.5 * mass,
                    h,
                    atoms: ids,
                }
            })
            .collect();
        out.push(cells);
    }
    let exceptional = vec![0.0; levels + 1];
    Ok(finish(s, epsilon, big_m, delta, atoms, out, exceptional))
}

impl CantorStructure {
    /// `N`, the number of generations below the plane.
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn prime_atoms(&self) -> Vec<Atom> {
        self.prime.iter().map(|&i| self.mu[i]).collect()
    }

    pub fn mu_prime(&self) -> Measure {
        Measure::Atomic(self.prime_atoms())
    }

    /// `μ′(Q_j⁽ⁿ⁾)` for every cell of generation `n`.
    pub fn prime_masses(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.levels[n].len()];
        for (a, m) in self.prime.iter().zip(&self.membership) {
            out[m[n]] += self.mu[*a].weight;
        }
        out
    }

    /// Chain of cells containing `x`, one per generation.
    pub fn locate(&self, x: Point2) -> Result<Vec<usize>> {
        if let Some(k) = self.prime.iter().position(|&i| self.mu[i].at == x) {
            return Ok(self.membership[k].clone());
        }
        let mut chain = vec![0];
        for n in 1..self.levels.len() {
            let parent = chain[n - 1];
            let j = self.levels[n]
                .iter()
                .position(|c| c.parent == Some(parent) && c.contains(x))
                .ok_or(Error::OutsideCells)?;
            chain.push(j);
        }
        Ok(chain)
    }

    /// Deepest generation shared by two `μ′` atoms; `None` if they share `Q⁽ᴺ⁾`.
    fn split_level(&self, a: usize, b: usize) -> Option<usize> {
        let (ma, mb) = (&self.membership[a], &self.membership[b]);
        (0..self.depth()).find(|&n| ma[n + 1] != mb[n + 1])
    }

    /// `R⁽ⁿ⁾μ′` at every atom of `μ′`: `out[n][a]`.
    pub fn partial_potentials(&self) -> Result<Vec<Vec<[f64; 2]>>> {
        let n_levels = self.depth();
        let per_atom: Vec<Vec<[f64; 2]>> = (0..self.prime.len())
            .into_par_iter()
            .map(|a| {
                let x = self.mu[self.prime[a]].at;
                let mut acc = vec![[0.0; 2]; n_levels];
                for b in 0..self.prime.len() {
                    if let Some(n) = self.split_level(a, b) {
                        let y = self.mu[self.prime[b]];
                        let k = kernel(self.s, x - y.at)?;
                        acc[n][0] += y.weight * k[0];
                        acc[n][1] += y.weight * k[1];
                    }
                }
                Ok(acc)
            })
            .collect::<Result<_>>()?;
        Ok((0..n_levels).map(|n| per_atom.iter().map(|v| v[n]).collect()).collect())
    }

    /// `R⁽ⁿ⁾μ′(x) = ∫_{Q⁽ⁿ⁾(x)∖Q⁽ⁿ⁺¹⁾(x)} K(x−y) dμ′(y)`.
    pub fn partial_potential(&self, n: usize, x: Point2) -> Result<[f64; 2]> {
        if n >= self.depth() {
            return Err(Error::InvalidParameter(format!("level {n} >= N = {}", self.depth())));
        }
        let chain = self.locate(x)?;
        let mut acc = [0.0; 2];
        for (a, m) in self.prime.iter().zip(&self.membership) {
            if m[n] == chain[n] && m[n + 1] != chain[n + 1] {
                let y = self.mu[*a];
                let k = kernel(self.s, x - y.at)?;
                acc[0] += y.weight * k[0];
                acc[1] += y.weight * k[1];
            }
        }
        Ok(acc)
    }

    /// Regions of generation `n`.
    pub fn regions(&self, n: usize) -> Vec<Region> {
        self.levels[n].iter().filter_map(|c| c.region.clone()).collect()
    }

    /// Nested JSON tree of cells.
    pub fn to_json(&self) -> String {
        fn node(st: &CantorStructure, n: usize, j: usize) -> Value {
            let c = &st.levels[n][j];
            let children: Vec<Value> = if n + 1 < st.levels.len() {
                st.levels[n + 1].iter().enumerate().filter(|(_, k)| k.parent == Some(j)).map(|(i, _)| node(st, n + 1, i)).collect()
            } else {
                Vec::new()
            };
            json!({
                "level": n,
                "index": j,
                "mass": c.mass,
                "m": c.m,
                "H": c.h,
                "region": c.region,
                "ball": c.ball,
                "inner": c.inner,
                "atoms": c.atoms.len(),
                "children": children,
            })
        }
        let doc = json!({
            "s": self.s,
            "epsilon": self.epsilon,
            "M": self.big_m,
            "delta": self.delta,
            "N": self.depth(),
            "exceptional": self.exceptional,
            "mu_prime_atoms": self.prime.len(),
            "root": node(self, 0, 0),
        });
        serde_json::to_string(&doc).expect("structure serialises")
    }
}

/// `R̃ν(x) = R(χ_{ℝ²∖Ω(x)} ν)(x)`, `Ω(x)` the cell containing `x`.
pub fn tilde_r(nu: &Measure, cells: &[Region], x: Point2, s: f64) -> Result<[f64; 2]> {
    let own = cells.iter().find(|c| c.contains(x)).ok_or(Error::OutsideCells)?;
    let skip = |_: usize, y: Point2| own.contains(y);
    Ok(transform_direct(nu, s, &[x], Some(&skip))?[0])
}

/// One row of the energy growth table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyRow {
    #[serde(rename = "N")]
    pub levels: usize,
    /// `∫|Σ_{n<N} R⁽ⁿ⁾μ′|² dμ′`.
    pub energy: f64,
    pub energy_per_level: f64,
    /// `G_{N−1,N−1}`.
    pub diagonal: f64,
    /// `max_{k<N−1} |G_{N−1,k}| / min(G_{N−1,N−1}, G_{kk})`.
    pub max_off_ratio: f64,
}

/// `G_{nk} = ∫⟨R⁽ⁿ⁾μ′, R⁽ᵏ⁾μ′⟩ dμ′` from the partial potentials at the atoms.
pub fn gram_from_partials(st: &CantorStructure, partials: &[Vec<[f64; 2]>]) -> Vec<Vec<f64>> {
    let w: Vec<f64> = st.prime_atoms().iter().map(|a| a.weight).collect();
    let n = partials.len();
    let mut g = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            g[i][k] = partials[i].iter().zip(&partials[k]).zip(&w).map(|((p, q), w)| w * (p[0] * q[0] + p[1] * q[1])).sum();
        }
    }
    g
}

/// Energy of the first `N` partial potentials for `N = 1..=depth`.
pub fn energy_table(gram: &[Vec<f64>]) -> Vec<EnergyRow> {
    (1..=gram.len())
        .map(|big_n| {
            let energy: f64 = (0..big_n).flat_map(|i| (0..big_n).map(move |k| (i, k))).map(|(i, k)| gram[i][k]).sum();
            let d = big_n - 1;
            let max_off_ratio = (0..d).map(|k| gram[d][k].abs() / gram[d][d].min(gram[k][k])).fold(0.0, f64::max);
            EnergyRow { levels: big_n, energy, energy_per_level: energy / big_n as f64, diagonal: gram[d][d], max_off_ratio }
        })
        .collect()
}

pub fn energy_csv(rows: &[EnergyRow]) -> String {
    let mut out = String::from("N,energy,energy_per_level,diagonal,max_off_ratio\n");
    for r in rows {
        out.push_str(&format!("{},{:.12e},{:.12e},{:.12e},{:.12e}\n", r.levels, r.energy, r.energy_per_level, r.diagonal, r.max_off_ratio));
    }
    out
}
