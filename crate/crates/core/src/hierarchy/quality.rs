use super::MeshHierarchy;
use crate::error::Result;
use crate::mesh::geometry::triangle_area;
use crate::mesh::PolyMesh;
use std::fmt::Write as _;
use std::path::Path;

/// Pass thresholds for the shape-regularity proxies. They are heuristics:
/// the analysis only requires the quantities to stay bounded.
pub const FACE_SIMPLEX_MAX_RATIO: f64 = 25.0;
pub const MIN_AREA_RATIO: f64 = 0.05;
pub const MIN_SUBTRI_RATIO: f64 = 1e-3;
pub const MAX_COVER_COUNT: usize = 60;

/// Raw proxy values for one level.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeProxies {
    /// max over faces of h |F| / (2 |T_F|), T_F the triangle from F to the centroid
    pub face_simplex_ratio: f64,
    /// min |kappa| / h^2
    pub area_ratio: f64,
    /// min sub-triangle area / element area
    pub subtri_ratio: f64,
    /// max number of element centroids within 2 h of an element centroid
    pub cover_count: usize,
}

impl ShapeProxies {
    pub fn flags(&self) -> [bool; 4] {
        [
            self.face_simplex_ratio <= FACE_SIMPLEX_MAX_RATIO,
            self.area_ratio >= MIN_AREA_RATIO,
            self.subtri_ratio >= MIN_SUBTRI_RATIO,
            self.cover_count <= MAX_COVER_COUNT,
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelQuality {
    /// 1 is the coarsest level
    pub level: usize,
    pub element_count: usize,
    pub theta: f64,
    pub max_faces: usize,
    /// element count of the next finer level over this one
    pub coarsening_factor: Option<f64>,
    /// max h ratio coarse/fine over faces shared with the next finer level
    pub theta_to_finer: Option<f64>,
    /// min of the same ratio; strict coarsening needs it above 1
    pub min_ratio_to_finer: Option<f64>,
    pub proxies: ShapeProxies,
}

impl LevelQuality {
    pub fn nesting_pass(&self) -> Option<bool> {
        self.min_ratio_to_finer
            .zip(self.theta_to_finer)
            .map(|(lo, hi)| lo > 1.0 && hi.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub levels: Vec<LevelQuality>,
    /// max over level pairs, None when no pair strictly coarsens
    pub theta_max: Option<f64>,
}

fn proxies(mesh: &PolyMesh) -> ShapeProxies {
    let verts = mesh.vertices();
    let mut face_simplex_ratio: f64 = 0.0;
    let mut area_ratio = f64::INFINITY;
    let mut subtri_ratio = f64::INFINITY;
    for (e, el) in mesh.elements().iter().enumerate() {
        area_ratio = area_ratio.min(el.area / (el.diameter * el.diameter));
        for &f in mesh.element_faces(e) {
            let face = &mesh.faces()[f];
            let [a, b] = face.endpoints.map(|v| verts[v]);
            let t = triangle_area(a, b, el.centroid).abs();
            let r = if t > 0.0 {
                el.diameter * face.length / (2.0 * t)
            } else {
                f64::INFINITY
            };
            face_simplex_ratio = face_simplex_ratio.max(r);
        }
        for tri in mesh.sub_triangles(e) {
            let [a, b, c] = mesh.triangle_points(tri);
            subtri_ratio = subtri_ratio.min(triangle_area(a, b, c) / el.area);
        }
    }
    let mut cover_count = 0;
    let els = mesh.elements();
    for el in els {
        let r2 = 4.0 * el.diameter * el.diameter;
        let c = els.iter().filter(|o| o.centroid.dist2(el.centroid) <= r2).count();
        cover_count = cover_count.max(c);
    }
    ShapeProxies {
        face_simplex_ratio,
        area_ratio,
        subtri_ratio,
        cover_count,
    }
}

pub fn quality_report(h: &MeshHierarchy) -> QualityReport {
    let n = h.n_levels();
    let mut levels = Vec::with_capacity(n);
    for k in 0..n {
        let mesh = h.level(k);
        let mut lq = LevelQuality {
            level: k + 1,
            element_count: mesh.n_elements(),
            theta: mesh.theta(),
            max_faces: mesh.max_faces_per_element(),
            coarsening_factor: None,
            theta_to_finer: None,
            min_ratio_to_finer: None,
            proxies: proxies(mesh),
        };
        if k + 1 < n {
            let fine = h.level(k + 1);
            let map = &h.maps()[k].fine_to_coarse;
            lq.coarsening_factor = Some(fine.n_elements() as f64 / mesh.n_elements() as f64);
            if fine.n_elements() != mesh.n_elements() {
                let (mut hi, mut lo) = (0.0f64, f64::INFINITY);
                for face in fine.faces() {
                    let owners = std::iter::once(face.plus).chain(face.minus);
                    if face.minus.is_some_and(|m| map[m] == map[face.plus]) {
                        continue;
                    }
                    for e in owners {
                        let r = mesh.element(map[e]).diameter / fine.element(e).diameter;
                        hi = hi.max(r);
                        lo = lo.min(r);
                    }
                }
                lq.theta_to_finer = Some(hi);
                lq.min_ratio_to_finer = Some(lo);
            }
        }
        levels.push(lq);
    }
    let theta_max = levels.iter().filter_map(|l| l.theta_to_finer).reduce(f64::max);
    QualityReport { levels, theta_max }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

impl QualityReport {
    /// One row per level, then a `Theta` row with the maximum over pairs.
    /// The `Theta` column of level k holds the ratio between levels k and k+1.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "level,theta_j,max_faces,element_count,coarsening_factor,Theta,face_simplex_ok,area_ok,subtri_ok,cover_ok,nesting_ok\n",
        );
        for l in &self.levels {
            let f = l.proxies.flags();
            let nest = l.nesting_pass().map(|b| b.to_string()).unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{}",
                l.level,
                l.theta,
                l.max_faces,
                l.element_count,
                opt(l.coarsening_factor),
                opt(l.theta_to_finer),
                f[0],
                f[1],
                f[2],
                f[3],
                nest
            );
        }
        let _ = writeln!(s, "Theta,,,,,{},,,,,", opt(self.theta_max));
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io_util::write_atomic(path.as_ref(), self.to_csv().as_bytes())
    }
}
