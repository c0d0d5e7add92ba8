//! Service placement: which service types run on which UAV.
//!
//! A placement is feasible when every UAV stays within its memory and storage
//! budgets and every service type is hosted by at least one UAV.

use std::cmp::Ordering;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{ScenarioConfig, BITS_PER_GB};
use crate::error::{ConfigError, PlacementError};

/// Enumeration guard: at most this many matrix cells (2^20 candidates).
pub const MAX_ENUMERATION_CELLS: usize = 20;

const FOOTPRINT_ATTEMPTS: usize = 1000;

/// Per-type service footprints and per-UAV budgets, all in bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceCatalog {
    pub memory_footprint: Vec<f64>,
    pub storage_footprint: Vec<f64>,
    pub memory_budget: Vec<f64>,
    pub storage_budget: Vec<f64>,
}

impl ServiceCatalog {
    pub fn uavs(&self) -> usize {
        self.memory_budget.len()
    }

    pub fn types(&self) -> usize {
        self.memory_footprint.len()
    }

    /// Draws budgets from the configured ranges and footprints from the same
    /// ranges divided by the number of types, resampling footprints until a
    /// covering placement exists.
    pub fn sample<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<Self, ConfigError> {
        let r = &cfg.resources;
        let draw = |rng: &mut R, range: [f64; 2], scale: f64| -> f64 {
            let (lo, hi) = (range[0] * scale, range[1] * scale);
            if hi > lo {
                rng.random_range(lo..=hi)
            } else {
                lo
            }
        };
        let memory_budget: Vec<f64> = (0..cfg.uavs).map(|_| draw(rng, r.memory_gb, BITS_PER_GB)).collect();
        let storage_budget: Vec<f64> = (0..cfg.uavs).map(|_| draw(rng, r.storage_gb, BITS_PER_GB)).collect();
        let per_type = BITS_PER_GB / cfg.service_types as f64;
        for _ in 0..FOOTPRINT_ATTEMPTS {
            let memory_footprint = (0..cfg.service_types).map(|_| draw(rng, r.memory_gb, per_type)).collect();
            let storage_footprint = (0..cfg.service_types).map(|_| draw(rng, r.storage_gb, per_type)).collect();
            let catalog = Self {
                memory_footprint,
                storage_footprint,
                memory_budget: memory_budget.clone(),
                storage_budget: storage_budget.clone(),
            };
            if coverage_anchor(&catalog).is_some() {
                return Ok(catalog);
            }
        }
        Err(ConfigError::Infeasible(format!(
            "no covering service placement found after {FOOTPRINT_ATTEMPTS} footprint draws"
        )))
    }
}

/// M×Z boolean matrix; `get(m, z)` is true iff service z runs on UAV m.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlacementMatrix {
    uavs: usize,
    types: usize,
    cells: Vec<bool>,
}

impl PlacementMatrix {
    pub fn empty(uavs: usize, types: usize) -> Self {
        Self {
            uavs,
            types,
            cells: vec![false; uavs * types],
        }
    }

    pub fn full(uavs: usize, types: usize) -> Self {
        Self {
            uavs,
            types,
            cells: vec![true; uavs * types],
        }
    }

    /// Bit `m * types + z` of `mask` selects cell (m, z).
    pub fn from_mask(uavs: usize, types: usize, mask: u64) -> Self {
        let cells = (0..uavs * types).map(|i| mask >> i & 1 == 1).collect();
        Self { uavs, types, cells }
    }

    pub fn from_rows(rows: &[Vec<bool>]) -> Self {
        let uavs = rows.len();
        let types = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == types), "ragged placement rows");
        Self {
            uavs,
            types,
            cells: rows.concat(),
        }
    }

    pub fn uavs(&self) -> usize {
        self.uavs
    }

    pub fn types(&self) -> usize {
        self.types
    }

    pub fn get(&self, m: usize, z: usize) -> bool {
        self.cells[m * self.types + z]
    }

    pub fn set(&mut self, m: usize, z: usize, on: bool) {
        self.cells[m * self.types + z] = on;
    }

    pub fn hosts(&self, z: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.uavs).filter(move |&m| self.get(m, z))
    }

    pub fn host_count(&self, z: usize) -> usize {
        self.hosts(z).count()
    }

    pub fn memory_used(&self, m: usize, catalog: &ServiceCatalog) -> f64 {
        (0..self.types)
            .filter(|&z| self.get(m, z))
            .map(|z| catalog.memory_footprint[z])
            .sum()
    }

    pub fn storage_used(&self, m: usize, catalog: &ServiceCatalog) -> f64 {
        (0..self.types)
            .filter(|&z| self.get(m, z))
            .map(|z| catalog.storage_footprint[z])
            .sum()
    }

    fn fits(&self, m: usize, catalog: &ServiceCatalog) -> bool {
        self.memory_used(m, catalog) <= catalog.memory_budget[m]
            && self.storage_used(m, catalog) <= catalog.storage_budget[m]
    }
}

/// Per-constraint outcome of [`validate_placement`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// UAVs whose memory budget is exceeded.
    pub memory_violations: Vec<usize>,
    /// UAVs whose storage budget is exceeded.
    pub storage_violations: Vec<usize>,
    /// Service types hosted nowhere.
    pub uncovered: Vec<usize>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.memory_violations.is_empty() && self.storage_violations.is_empty() && self.uncovered.is_empty()
    }
}

pub fn validate_placement(p: &PlacementMatrix, catalog: &ServiceCatalog) -> FeasibilityReport {
    assert_eq!(p.uavs(), catalog.uavs(), "placement/catalog UAV count mismatch");
    assert_eq!(p.types(), catalog.types(), "placement/catalog type count mismatch");
    let mut report = FeasibilityReport::default();
    for m in 0..p.uavs() {
        if p.memory_used(m, catalog) > catalog.memory_budget[m] {
            report.memory_violations.push(m);
        }
        if p.storage_used(m, catalog) > catalog.storage_budget[m] {
            report.storage_violations.push(m);
        }
    }
    report.uncovered = (0..p.types()).filter(|&z| p.host_count(z) == 0).collect();
    report
}

/// Finds a placement hosting every type exactly once, by depth-first search
/// over type → UAV assignments. A feasible placement exists iff this succeeds,
/// since dropping redundant copies never breaks a budget.
pub fn coverage_anchor(catalog: &ServiceCatalog) -> Option<PlacementMatrix> {
    let (uavs, types) = (catalog.uavs(), catalog.types());
    // Place the largest services first so dead ends show up early.
    let max_mem = catalog.memory_budget.iter().cloned().fold(f64::MIN, f64::max);
    let max_sto = catalog.storage_budget.iter().cloned().fold(f64::MIN, f64::max);
    let size = |z: usize| catalog.memory_footprint[z] / max_mem + catalog.storage_footprint[z] / max_sto;
    let mut order: Vec<usize> = (0..types).collect();
    order.sort_by(|&a, &b| size(b).partial_cmp(&size(a)).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    let mut mem = vec![0.0; uavs];
    let mut sto = vec![0.0; uavs];
    let mut assign = vec![usize::MAX; types];

    fn dfs(
        i: usize,
        order: &[usize],
        catalog: &ServiceCatalog,
        mem: &mut [f64],
        sto: &mut [f64],
        assign: &mut [usize],
    ) -> bool {
        let Some(&z) = order.get(i) else {
            return true;
        };
        for m in 0..mem.len() {
            let (nm, ns) = (mem[m] + catalog.memory_footprint[z], sto[m] + catalog.storage_footprint[z]);
            if nm <= catalog.memory_budget[m] && ns <= catalog.storage_budget[m] {
                let (om, os) = (mem[m], sto[m]);
                mem[m] = nm;
                sto[m] = ns;
                assign[z] = m;
                if dfs(i + 1, order, catalog, mem, sto, assign) {
                    return true;
                }
                mem[m] = om;
                sto[m] = os;
            }
        }
        false
    }

    if !dfs(0, &order, catalog, &mut mem, &mut sto, &mut assign) {
        return None;
    }
    let mut p = PlacementMatrix::empty(uavs, types);
    for (z, &m) in assign.iter().enumerate() {
        p.set(m, z, true);
    }
    Some(p)
}

/// Highest logit first; ties go to the lowest (m, z) index.
fn by_logit_desc(logits: &[f64]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |&a, &b| logits[b].partial_cmp(&logits[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b))
}

/// Projects a continuous M×Z logit matrix (row-major) onto the feasible set.
///
/// 1. keep cells with positive logit;
/// 2. per UAV, drop the lowest-logit services until both budgets hold;
/// 3. place each uncovered type on the highest-logit UAV that can take it,
///    evicting that UAV's lowest-logit services hosted elsewhere if needed;
/// 4. if that still leaves a type uncovered, start from the coverage anchor
///    and add candidate cells greedily by logit.
///
/// `anchor` must be a feasible placement for `catalog`.
pub fn repair_placement(
    logits: &[f64],
    catalog: &ServiceCatalog,
    anchor: &PlacementMatrix,
) -> Result<PlacementMatrix, PlacementError> {
    let (uavs, types) = (catalog.uavs(), catalog.types());
    if logits.len() != uavs * types {
        return Err(PlacementError::Shape {
            expected: uavs * types,
            got: logits.len(),
        });
    }
    if logits.iter().any(|x| !x.is_finite()) {
        return Err(PlacementError::NonFinite);
    }
    let idx = |m: usize, z: usize| m * types + z;
    let mut p = PlacementMatrix::empty(uavs, types);
    for m in 0..uavs {
        for z in 0..types {
            p.set(m, z, logits[idx(m, z)] > 0.0);
        }
    }

    for m in 0..uavs {
        // Lowest logit dropped first; among ties the highest index goes first.
        let mut placed: Vec<usize> = (0..types).filter(|&z| p.get(m, z)).collect();
        placed.sort_by(|&a, &b| by_logit_desc(logits)(&idx(m, a), &idx(m, b)));
        while !p.fits(m, catalog) {
            let z = placed.pop().expect("an empty UAV always fits");
            p.set(m, z, false);
        }
    }

    for z in 0..types {
        if p.host_count(z) > 0 {
            continue;
        }
        let mut candidates: Vec<usize> = (0..uavs).map(|m| idx(m, z)).collect();
        candidates.sort_by(by_logit_desc(logits));
        for cell in candidates {
            let m = cell / types;
            let snapshot = p.clone();
            p.set(m, z, true);
            let mut evictable: Vec<usize> = (0..types)
                .filter(|&y| y != z && p.get(m, y) && p.host_count(y) > 1)
                .collect();
            evictable.sort_by(|&a, &b| by_logit_desc(logits)(&idx(m, a), &idx(m, b)));
            while !p.fits(m, catalog) {
                match evictable.pop() {
                    Some(y) => p.set(m, y, false),
                    None => break,
                }
            }
            if p.fits(m, catalog) {
                break;
            }
            p = snapshot;
        }
    }

    if validate_placement(&p, catalog).is_feasible() {
        return Ok(p);
    }
    let mut fallback = anchor.clone();
    let mut cells: Vec<usize> = (0..uavs * types).filter(|&c| logits[c] > 0.0).collect();
    cells.sort_by(by_logit_desc(logits));
    for cell in cells {
        let (m, z) = (cell / types, cell % types);
        if !fallback.get(m, z) {
            fallback.set(m, z, true);
            if !fallback.fits(m, catalog) {
                fallback.set(m, z, false);
            }
        }
    }
    Ok(fallback)
}

/// Yields exactly the feasible placements, in increasing bit-mask order.
pub fn enumerate_feasible_placements(
    catalog: &ServiceCatalog,
) -> Result<impl Iterator<Item = PlacementMatrix> + '_, PlacementError> {
    let (uavs, types) = (catalog.uavs(), catalog.types());
    if uavs * types > MAX_ENUMERATION_CELLS {
        return Err(PlacementError::TooLarge {
            uavs,
            types,
            limit: MAX_ENUMERATION_CELLS,
        });
    }
    Ok((0..1u64 << (uavs * types))
        .map(move |mask| PlacementMatrix::from_mask(uavs, types, mask))
        .filter(move |p| validate_placement(p, catalog).is_feasible()))
}

/// Placement for the fixed-placement baseline: type z goes to UAV z mod M (or
/// the next UAV with room), then every UAV is filled greedily in index order.
pub fn fixed_service_placement(catalog: &ServiceCatalog, anchor: &PlacementMatrix) -> PlacementMatrix {
    let (uavs, types) = (catalog.uavs(), catalog.types());
    let mut p = PlacementMatrix::empty(uavs, types);
    for z in 0..types {
        for offset in 0..uavs {
            let m = (z + offset) % uavs;
            p.set(m, z, true);
            if p.fits(m, catalog) {
                break;
            }
            p.set(m, z, false);
        }
    }
    if !validate_placement(&p, catalog).is_feasible() {
        p = anchor.clone();
    }
    for m in 0..uavs {
        for z in 0..types {
            if !p.get(m, z) {
                p.set(m, z, true);
                if !p.fits(m, catalog) {
                    p.set(m, z, false);
                }
            }
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const GB: f64 = BITS_PER_GB;

    fn catalog(mem: &[f64], sto: &[f64], mem_budget: &[f64], sto_budget: &[f64]) -> ServiceCatalog {
        ServiceCatalog {
            memory_footprint: mem.iter().map(|x| x * GB).collect(),
            storage_footprint: sto.iter().map(|x| x * GB).collect(),
            memory_budget: mem_budget.iter().map(|x| x * GB).collect(),
            storage_budget: sto_budget.iter().map(|x| x * GB).collect(),
        }
    }

    fn ample(uavs: usize, types: usize) -> ServiceCatalog {
        catalog(&vec![1.0; types], &vec![1.0; types], &vec![100.0; uavs], &vec![100.0; uavs])
    }

    #[test]
    fn memory_violation_is_reported_per_uav() {
        let c = catalog(&[5.0, 6.0], &[1.0, 1.0], &[10.0, 10.0], &[100.0, 100.0]);
        let p = PlacementMatrix::from_rows(&[vec![true, true], vec![false, false]]);
        let r = validate_placement(&p, &c);
        assert_eq!(r.memory_violations, vec![0]);
        assert!(r.storage_violations.is_empty());
        assert!(r.uncovered.is_empty());
        assert!(!r.is_feasible());
    }

    #[test]
    fn identity_placement_is_feasible() {
        let c = catalog(&[5.0, 6.0, 7.0], &[1.0; 3], &[10.0; 3], &[100.0; 3]);
        let p = PlacementMatrix::from_rows(&[
            vec![true, false, false],
            vec![false, true, false],
            vec![false, false, true],
        ]);
        assert!(validate_placement(&p, &c).is_feasible());
    }

    #[test]
    fn empty_matrix_uncovers_every_type() {
        let c = ample(2, 3);
        let r = validate_placement(&PlacementMatrix::empty(2, 3), &c);
        assert_eq!(r.uncovered, vec![0, 1, 2]);
    }

    #[test]
    fn positive_logits_with_ample_budget_keep_everything() {
        let c = ample(2, 3);
        let anchor = coverage_anchor(&c).unwrap();
        let p = repair_placement(&[0.3, 0.1, 0.9, 0.2, 0.5, 0.01], &c, &anchor).unwrap();
        assert_eq!(p, PlacementMatrix::full(2, 3));
    }

    #[test]
    fn negative_logits_force_minimal_coverage_at_max_logit() {
        let c = ample(3, 2);
        let anchor = coverage_anchor(&c).unwrap();
        // column 0 peaks at UAV 2, column 1 at UAV 0
        let logits = [-0.5, -0.1, -0.9, -0.7, -0.2, -0.8];
        let p = repair_placement(&logits, &c, &anchor).unwrap();
        for z in 0..2 {
            assert_eq!(p.host_count(z), 1);
        }
        assert!(p.get(2, 0));
        assert!(p.get(0, 1));
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let c = ample(3, 1);
        let anchor = coverage_anchor(&c).unwrap();
        let p = repair_placement(&[-1.0, -1.0, -1.0], &c, &anchor).unwrap();
        assert!(p.get(0, 0) && !p.get(1, 0) && !p.get(2, 0));
    }

    #[test]
    fn repair_drops_lowest_logit_over_budget() {
        let c = catalog(&[6.0, 6.0], &[1.0, 1.0], &[10.0, 10.0], &[100.0, 100.0]);
        let anchor = coverage_anchor(&c).unwrap();
        let p = repair_placement(&[0.9, 0.2, 0.1, 0.8], &c, &anchor).unwrap();
        assert!(validate_placement(&p, &c).is_feasible());
        assert!(p.get(0, 0) && !p.get(0, 1));
        assert!(p.get(1, 1) && !p.get(1, 0));
    }

    #[test]
    fn enumeration_guard_refuses_large_instances() {
        let c = ample(5, 5);
        assert!(matches!(
            enumerate_feasible_placements(&c),
            Err(PlacementError::TooLarge { .. })
        ));
    }

    #[test]
    fn enumerate_single_cell() {
        let c = ample(1, 1);
        let all: Vec<_> = enumerate_feasible_placements(&c).unwrap().collect();
        assert_eq!(all, vec![PlacementMatrix::full(1, 1)]);
    }

    #[test]
    fn enumerate_two_uavs_one_type() {
        let c = ample(2, 1);
        assert_eq!(enumerate_feasible_placements(&c).unwrap().count(), 3);
    }

    /// Independent filter over all 2^(MZ) matrices, written against the raw
    /// budget arithmetic rather than `validate_placement`.
    fn brute_force_count(c: &ServiceCatalog) -> usize {
        let (m, z) = (c.uavs(), c.types());
        (0u64..1 << (m * z))
            .filter(|mask| {
                let bit = |u: usize, t: usize| mask >> (u * z + t) & 1 == 1;
                let budgets_ok = (0..m).all(|u| {
                    let mem: f64 = (0..z).filter(|&t| bit(u, t)).map(|t| c.memory_footprint[t]).sum();
                    let sto: f64 = (0..z).filter(|&t| bit(u, t)).map(|t| c.storage_footprint[t]).sum();
                    mem <= c.memory_budget[u] && sto <= c.storage_budget[u]
                });
                let covered = (0..z).all(|t| (0..m).any(|u| bit(u, t)));
                budgets_ok && covered
            })
            .count()
    }

    #[test]
    fn enumerate_matches_brute_force_with_scaled_budgets() {
        // Budgets at the ends of the memory/storage ranges, footprints = range / Z.
        let c = catalog(&[9.0, 11.5], &[300.0, 420.0], &[10.0, 24.0], &[400.0, 860.0]);
        let n = enumerate_feasible_placements(&c).unwrap().count();
        assert_eq!(n, brute_force_count(&c));
        // UAV 0 can host only type 0 (memory 9 <= 10, storage 300 <= 400);
        // UAV 1 can host {0}, {1} or both. Type 1 forces UAV 1 to host it,
        // leaving ({}, {0,1}), ({0}, {1}) and ({0}, {0,1}).
        assert_eq!(n, 3);
    }

    #[test]
    fn fixed_placement_round_robin_then_fill() {
        let c = catalog(&[6.0, 6.0, 6.0], &[1.0; 3], &[12.0, 12.0], &[100.0, 100.0]);
        let anchor = coverage_anchor(&c).unwrap();
        let p = fixed_service_placement(&c, &anchor);
        assert!(validate_placement(&p, &c).is_feasible());
        // round robin: 0 -> UAV0, 1 -> UAV1, 2 -> UAV0; fill adds type 0 to UAV1
        assert!(p.get(0, 0) && p.get(1, 1) && p.get(0, 2));
        assert!(p.get(1, 0));
        assert!(!p.get(0, 1) && !p.get(1, 2));
    }

    #[test]
    fn anchor_none_when_a_service_fits_nowhere() {
        let c = catalog(&[30.0], &[1.0], &[10.0, 24.0], &[100.0, 100.0]);
        assert!(coverage_anchor(&c).is_none());
    }

    fn arb_catalog() -> impl Strategy<Value = ServiceCatalog> {
        (1usize..=3, 1usize..=4).prop_flat_map(|(m, z)| {
            (
                proptest::collection::vec(1.0f64..12.0, z),
                proptest::collection::vec(100.0f64..430.0, z),
                proptest::collection::vec(10.0f64..24.0, m),
                proptest::collection::vec(400.0f64..860.0, m),
            )
                .prop_map(|(a, b, ab, bb)| catalog(&a, &b, &ab, &bb))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn repair_is_feasible_whenever_any_placement_is(
            c in arb_catalog(),
            raw in proptest::collection::vec(-1.0f64..1.0, 12),
        ) {
            let feasible_exists = enumerate_feasible_placements(&c).unwrap().next().is_some();
            prop_assert_eq!(feasible_exists, coverage_anchor(&c).is_some());
            if let Some(anchor) = coverage_anchor(&c) {
                let logits = &raw[..c.uavs() * c.types()];
                let p = repair_placement(logits, &c, &anchor).unwrap();
                prop_assert!(validate_placement(&p, &c).is_feasible());
                let again = repair_placement(logits, &c, &anchor).unwrap();
                prop_assert_eq!(p, again);
            }
        }
    }
}
