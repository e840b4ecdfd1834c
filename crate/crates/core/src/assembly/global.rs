use super::element::{
    element_matrix_qfree, element_matrix_quadrature, element_rule, ReconstructionPlan,
};
use super::face::{face_coupling, FaceCoupling};
use super::{AssemblyPath, TransportData};
use crate::basis::{
    basis_index_map, bounding_box, build_product_tables, BoundingBoxMap, Normalization,
};
use crate::homint::IntegrationOptions;
use crate::mesh::PolytopicMesh;
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use std::io::Write;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AssemblyOptions {
    pub path: AssemblyPath,
    pub norm: Normalization,
    pub homint: IntegrationOptions,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self {
            path: AssemblyPath::QuadratureFree,
            norm: Normalization::Orthonormal,
            homint: IntegrationOptions::default(),
        }
    }
}

/// Summed element counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct AssemblyStats {
    pub volume_flops: u64,
    pub integration_flops: u64,
    pub distance_flops: u64,
    pub reconstruction_visits: u64,
    pub quadrature_points: u64,
    pub underintegrated: usize,
}

/// Block-sparse system in compressed row layout: row `κ` holds the
/// diagonal block and one block per face neighbour, columns sorted.
#[derive(Clone, Debug)]
pub struct GlobalSystem {
    pub block_size: usize,
    pub n_elements: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub blocks: Vec<DMatrix<f64>>,
    pub rhs: DVector<f64>,
    pub stats: AssemblyStats,
}

struct Row {
    cols: Vec<(usize, DMatrix<f64>)>,
    rhs: DVector<f64>,
    stats: AssemblyStats,
}

/// Assemble `a(u, v) = ℓ(v)` with upwind fluxes. Each element owns its
/// block row, so the result does not depend on the schedule.
pub fn assemble_global(
    mesh: &PolytopicMesh,
    data: &TransportData,
    p: usize,
    opts: AssemblyOptions,
) -> Result<GlobalSystem> {
    let d = mesh.dim();
    let n_el = mesh.len();
    let nb = basis_index_map(p, d).len();
    if let super::Reaction::PerElement(v) = &data.reaction {
        if v.len() != n_el {
            return Err(Error::InvalidInput(format!(
                "{} reaction values for {n_el} elements",
                v.len()
            )));
        }
    }
    let maps: Vec<BoundingBoxMap> = (0..n_el)
        .map(|e| bounding_box(mesh.polytope(e)))
        .collect::<Result<_>>()?;
    let plan = match opts.path {
        AssemblyPath::QuadratureFree => Some(ReconstructionPlan::new(
            p,
            d,
            &build_product_tables(p, opts.norm)?,
        )?),
        AssemblyPath::Quadrature => None,
    };
    let adj = mesh.adjacency();
    let rows: Vec<Row> = (0..n_el)
        .into_par_iter()
        .map(|e| -> Result<Row> {
            let kappa = mesh.polytope(e);
            let vol = match &plan {
                Some(plan) => element_matrix_qfree(kappa, e, data, plan, opts.homint)?,
                None => element_matrix_quadrature(
                    kappa,
                    e,
                    data,
                    p,
                    &element_rule(kappa, p)?,
                    opts.norm,
                )?,
            };
            let stats = AssemblyStats {
                volume_flops: vol.counters.main_flops,
                integration_flops: vol.counters.integration_flops,
                distance_flops: vol.counters.distance_flops,
                reconstruction_visits: vol.counters.reconstruction_visits,
                quadrature_points: vol.counters.quadrature_points as u64,
                underintegrated: vol.underintegrated as usize,
            };
            let mut cols: Vec<(usize, DMatrix<f64>)> = std::iter::once(e)
                .chain(adj[e].iter().copied())
                .map(|c| (c, DMatrix::zeros(nb, nb)))
                .collect();
            cols.sort_by_key(|c| c.0);
            let slot = |c: usize, cols: &[(usize, DMatrix<f64>)]| {
                cols.binary_search_by_key(&c, |x| x.0).unwrap()
            };
            let diag = slot(e, &cols);
            cols[diag].1 += &vol.matrix;
            let mut rhs = DVector::zeros(nb);
            for &r in mesh.element_faces(e) {
                match face_coupling(mesh, e, r, data, p, opts.norm, &maps)? {
                    FaceCoupling::Tangential => {}
                    FaceCoupling::Outflow(m) => cols[diag].1 += m,
                    FaceCoupling::Inflow { neighbor, block } => {
                        let s = slot(neighbor, &cols);
                        cols[s].1 += block;
                    }
                    FaceCoupling::InflowData(v) => rhs += v,
                }
            }
            // Source term, one degree above the volume rule.
            let rule = element_rule(kappa, p + 1)?;
            let basis = basis_index_map(p, d);
            let (mut v, mut g) = (Vec::new(), Vec::new());
            for (x, w) in rule.points.iter().zip(&rule.weights) {
                basis.eval(opts.norm, &maps[e].to_reference(x), &mut v, &mut g);
                let fx = (data.source)(x);
                for i in 0..nb {
                    rhs[i] += w * fx * v[i];
                }
            }
            Ok(Row { cols, rhs, stats })
        })
        .collect::<Result<_>>()?;

    let mut row_ptr = Vec::with_capacity(n_el + 1);
    let mut col_idx = Vec::new();
    let mut blocks = Vec::new();
    let mut rhs = DVector::zeros(n_el * nb);
    let mut stats = AssemblyStats::default();
    row_ptr.push(0);
    for (e, row) in rows.into_iter().enumerate() {
        for (c, m) in row.cols {
            col_idx.push(c);
            blocks.push(m);
        }
        row_ptr.push(col_idx.len());
        rhs.rows_mut(e * nb, nb).copy_from(&row.rhs);
        stats.volume_flops += row.stats.volume_flops;
        stats.integration_flops += row.stats.integration_flops;
        stats.distance_flops += row.stats.distance_flops;
        stats.reconstruction_visits += row.stats.reconstruction_visits;
        stats.quadrature_points += row.stats.quadrature_points;
        stats.underintegrated += row.stats.underintegrated;
    }
    Ok(GlobalSystem {
        block_size: nb,
        n_elements: n_el,
        row_ptr,
        col_idx,
        blocks,
        rhs,
        stats,
    })
}

impl GlobalSystem {
    pub fn n_dofs(&self) -> usize {
        self.block_size * self.n_elements
    }

    /// `(column, block)` pairs of block row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, &DMatrix<f64>)> {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(&self.blocks[range])
    }

    pub fn block(&self, r: usize, c: usize) -> Option<&DMatrix<f64>> {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        let k = self.col_idx[range.clone()].binary_search(&c).ok()?;
        Some(&self.blocks[range.start + k])
    }

    pub fn matvec(&self, x: &DVector<f64>) -> DVector<f64> {
        let nb = self.block_size;
        let mut y = DVector::zeros(self.n_dofs());
        for r in 0..self.n_elements {
            let mut acc = DVector::zeros(nb);
            for (c, m) in self.row(r) {
                acc += m * x.rows(c * nb, nb);
            }
            y.rows_mut(r * nb, nb).copy_from(&acc);
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let nb = self.block_size;
        let mut a = DMatrix::zeros(self.n_dofs(), self.n_dofs());
        for r in 0..self.n_elements {
            for (c, m) in self.row(r) {
                a.view_mut((r * nb, c * nb), (nb, nb)).copy_from(m);
            }
        }
        a
    }

    /// One `row col value` line per stored entry, zero-based.
    pub fn write_coordinates<W: Write>(&self, mut w: W) -> Result<()> {
        let nb = self.block_size;
        for r in 0..self.n_elements {
            for (c, m) in self.row(r) {
                for i in 0..nb {
                    for j in 0..nb {
                        writeln!(w, "{} {} {:e}", r * nb + i, c * nb + j, m[(i, j)])?;
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::structured_mesh;
    use crate::Point;

    fn data() -> TransportData {
        TransportData::constant(Point::new(1.0, 0.5, 0.25), 1.0, |x| x.x, |x| x.y).unwrap()
    }

    #[test]
    fn paths_share_pattern_and_agree() {
        let mesh = structured_mesh(2, 0).unwrap();
        let q = assemble_global(
            &mesh,
            &data(),
            2,
            AssemblyOptions {
                path: AssemblyPath::Quadrature,
                ..Default::default()
            },
        )
        .unwrap();
        let f = assemble_global(&mesh, &data(), 2, AssemblyOptions::default()).unwrap();
        assert_eq!(q.row_ptr, f.row_ptr);
        assert_eq!(q.col_idx, f.col_idx);
        let (a, b) = (q.to_dense(), f.to_dense());
        assert!((&a - &b).amax() / a.amax() < 1e-11);
        assert_eq!(q.rhs, f.rhs);
    }

    #[test]
    fn pattern_is_symmetric_with_diagonals() {
        let mesh = structured_mesh(3, 1).unwrap();
        let s = assemble_global(&mesh, &data(), 1, AssemblyOptions::default()).unwrap();
        for r in 0..s.n_elements {
            assert!(s.block(r, r).is_some());
            for (c, _) in s.row(r) {
                assert!(s.block(c, r).is_some());
            }
        }
    }

    #[test]
    fn independent_of_thread_count() {
        let mesh = structured_mesh(2, 1).unwrap();
        let one = crate::with_threads(1, || {
            assemble_global(&mesh, &data(), 2, AssemblyOptions::default())
        })
        .unwrap()
        .unwrap();
        let four = crate::with_threads(4, || {
            assemble_global(&mesh, &data(), 2, AssemblyOptions::default())
        })
        .unwrap()
        .unwrap();
        assert_eq!(one.blocks, four.blocks);
        assert_eq!(one.rhs, four.rhs);
    }
}
