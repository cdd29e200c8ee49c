//! Nested agglomerated mesh hierarchies.

mod agglomerate;
mod mis;
mod quality;

pub use agglomerate::{agglomerate, coarsen, Agglomeration};
pub use mis::aggregate_algebraic_mis;
pub use quality::{quality_report, ShapeProxies, LevelQuality, QualityReport};

use crate::error::{Error, Result};
use crate::mesh::{load_mesh, save_mesh, PolyMesh};
use std::path::Path;
use std::sync::Arc;

pub const DEFAULT_TARGET_FACTOR: f64 = 4.0;

/// Smallest element count allowed on any level.
pub const MIN_LEVEL_ELEMENTS: usize = 4;

const NESTING_TOL: f64 = 1e-10;

/// Meshes ordered coarse (index 0) to fine, with `maps[k]` sending the
/// elements of level `k + 1` to those of level `k`.
#[derive(Debug, Clone)]
pub struct MeshHierarchy {
    levels: Vec<Arc<PolyMesh>>,
    maps: Vec<Agglomeration>,
    p_per_level: Vec<usize>,
}

impl MeshHierarchy {
    pub fn new(levels: Vec<Arc<PolyMesh>>, maps: Vec<Agglomeration>, p_per_level: Vec<usize>) -> Result<Self> {
        if levels.is_empty() || maps.len() + 1 != levels.len() || p_per_level.len() != levels.len() {
            return Err(Error::Hierarchy(format!(
                "{} levels need {} maps and degrees, got {} and {}",
                levels.len(),
                levels.len().saturating_sub(1),
                maps.len(),
                p_per_level.len()
            )));
        }
        if p_per_level.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Hierarchy("degrees must not decrease towards the fine level".into()));
        }
        for (k, map) in maps.iter().enumerate() {
            let (coarse, fine) = (&levels[k], &levels[k + 1]);
            if map.fine_to_coarse.len() != fine.n_elements() || map.coarse_count != coarse.n_elements() {
                return Err(Error::Hierarchy(format!("map {} -> {} has wrong dimensions", k + 2, k + 1)));
            }
            let mut area = vec![0.0; coarse.n_elements()];
            for (f, &c) in map.fine_to_coarse.iter().enumerate() {
                area[c] += fine.element(f).area;
            }
            for (c, a) in area.iter().enumerate() {
                let ca = coarse.element(c).area;
                if (a - ca).abs() > NESTING_TOL * ca {
                    return Err(Error::Hierarchy(format!(
                        "level {} element {c} is not the union of its children",
                        k + 1
                    )));
                }
            }
        }
        Ok(MeshHierarchy {
            levels,
            maps,
            p_per_level,
        })
    }

    /// Two identical levels joined by the identity map.
    pub fn identity_pair(mesh: Arc<PolyMesh>, p: usize) -> Self {
        let n = mesh.n_elements();
        MeshHierarchy {
            levels: vec![mesh.clone(), mesh],
            maps: vec![Agglomeration::identity(n)],
            p_per_level: vec![p, p],
        }
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[Arc<PolyMesh>] {
        &self.levels
    }

    pub fn level(&self, k: usize) -> &Arc<PolyMesh> {
        &self.levels[k]
    }

    pub fn finest(&self) -> &Arc<PolyMesh> {
        self.levels.last().expect("non-empty hierarchy")
    }

    pub fn maps(&self) -> &[Agglomeration] {
        &self.maps
    }

    pub fn p_per_level(&self) -> &[usize] {
        &self.p_per_level
    }

    /// Same meshes with a constant degree on every level.
    pub fn with_degree(&self, p: usize) -> Self {
        MeshHierarchy {
            p_per_level: vec![p; self.levels.len()],
            ..self.clone()
        }
    }

    /// The `k` finest levels.
    pub fn top(&self, k: usize) -> Result<Self> {
        let n = self.levels.len();
        if k == 0 || k > n {
            return Err(Error::InvalidArgument(format!("cannot take {k} of {n} levels")));
        }
        Ok(MeshHierarchy {
            levels: self.levels[n - k..].to_vec(),
            maps: self.maps[n - k..].to_vec(),
            p_per_level: self.p_per_level[n - k..].to_vec(),
        })
    }

    /// Writes `level_k.json` (k = 1 coarsest) and `level_k_to_{k-1}.json`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        for (k, mesh) in self.levels.iter().enumerate() {
            save_mesh(mesh, dir.join(format!("level_{}.json", k + 1)))?;
        }
        for (k, map) in self.maps.iter().enumerate() {
            let text = serde_json::to_string(&map.fine_to_coarse).expect("integer array serialises");
            crate::io_util::write_atomic(&dir.join(format!("level_{}_to_{}.json", k + 2, k + 1)), text.as_bytes())?;
        }
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>, p: usize) -> Result<Self> {
        let dir = dir.as_ref();
        let mut levels = Vec::new();
        while dir.join(format!("level_{}.json", levels.len() + 1)).exists() {
            levels.push(Arc::new(load_mesh(dir.join(format!("level_{}.json", levels.len() + 1)))?));
        }
        if levels.is_empty() {
            return Err(Error::Hierarchy(format!("no level_1.json in {}", dir.display())));
        }
        let mut maps = Vec::new();
        for k in 2..=levels.len() {
            let text = std::fs::read_to_string(dir.join(format!("level_{k}_to_{}.json", k - 1)))?;
            let map: Vec<usize> = serde_json::from_str(&text).map_err(|e| Error::Parse {
                line: e.line(),
                msg: e.to_string(),
            })?;
            maps.push(Agglomeration::new(map)?);
        }
        let n = levels.len();
        Self::new(levels, maps, vec![p; n])
    }
}

/// Agglomerates `fine` repeatedly into `levels` nested meshes with degree `p`
/// on every level. Level seeds are `rng_seed + k`.
pub fn build_hierarchy(
    fine: Arc<PolyMesh>,
    levels: usize,
    p: usize,
    target_factor: f64,
    rng_seed: u64,
) -> Result<MeshHierarchy> {
    if levels < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 levels, got {levels}")));
    }
    let needed = target_factor.powi(levels as i32 - 1);
    if (fine.n_elements() as f64) < needed {
        return Err(Error::Hierarchy(format!(
            "{} elements cannot support {levels} levels with factor {target_factor} (need {needed:.0}); use fewer levels",
            fine.n_elements()
        )));
    }
    let mut meshes = vec![fine];
    let mut maps = Vec::new();
    for k in 1..levels {
        let current = meshes.last().expect("non-empty");
        let agg = agglomerate(current, target_factor, rng_seed.wrapping_add(k as u64))?;
        if agg.coarse_count < MIN_LEVEL_ELEMENTS {
            return Err(Error::Hierarchy(format!(
                "level {} would have {} elements (< {MIN_LEVEL_ELEMENTS}); use fewer than {levels} levels",
                levels - k,
                agg.coarse_count
            )));
        }
        let coarse = coarsen(current, &agg)?;
        maps.push(agg);
        meshes.push(Arc::new(coarse));
    }
    meshes.reverse();
    maps.reverse();
    MeshHierarchy::new(meshes, maps, vec![p; levels])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_structured_triangular, generate_voronoi_lloyd};

    #[test]
    fn single_element_is_trivial() {
        let m = PolyMesh::from_loops(
            vec![
                crate::Point2::new(0.0, 0.0),
                crate::Point2::new(1.0, 0.0),
                crate::Point2::new(1.0, 1.0),
                crate::Point2::new(0.0, 1.0),
            ],
            vec![vec![0, 1, 2, 3]],
            None,
        )
        .unwrap();
        let a = agglomerate(&m, 4.0, 0).unwrap();
        assert_eq!(a.fine_to_coarse, vec![0]);
    }

    #[test]
    fn structured_total_map() {
        let m = generate_structured_triangular(2).unwrap();
        let a = agglomerate(&m, 4.0, 1).unwrap();
        assert_eq!(a.fine_to_coarse.len(), 8);
        assert!(a.is_connected(&m.adjacency()));
        let c = coarsen(&m, &a).unwrap();
        assert!((c.elements().iter().map(|e| e.area).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn voronoi_512_counts_and_connectivity() {
        let m = generate_voronoi_lloyd(512, 20, 1).unwrap();
        let a = agglomerate(&m, 4.0, 1).unwrap();
        assert!((64..=256).contains(&a.coarse_count), "{}", a.coarse_count);
        assert!(a.is_connected(&m.adjacency()));
    }

    #[test]
    fn four_levels_decrease() {
        let m = Arc::new(generate_voronoi_lloyd(1024, 20, 1).unwrap());
        let h = build_hierarchy(m.clone(), 4, 1, 4.0, 1).unwrap();
        let counts: Vec<usize> = h.levels().iter().map(|l| l.n_elements()).collect();
        assert!(counts.windows(2).all(|w| w[0] < w[1]), "{counts:?}");
        assert!(Arc::ptr_eq(h.finest(), &m));
        assert!(build_hierarchy(m, 50, 1, 4.0, 1).is_err());
    }

    #[test]
    fn save_load_round_trip() {
        let m = Arc::new(generate_voronoi_lloyd(128, 5, 2).unwrap());
        let h = build_hierarchy(m, 3, 1, 4.0, 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        h.save(dir.path()).unwrap();
        let back = MeshHierarchy::load(dir.path(), 1).unwrap();
        assert_eq!(back.n_levels(), 3);
        assert_eq!(back.maps(), h.maps());
        for (a, b) in back.levels().iter().zip(h.levels()) {
            assert_eq!(a.n_elements(), b.n_elements());
            assert_eq!(a.faces().len(), b.faces().len());
        }
    }
}
