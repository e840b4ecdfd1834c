//! Benchmark records and the runners behind the command-line harness.

use crate::assembly::{
    element_matrix_qfree, element_matrix_quadrature, element_rule, AssemblyOptions, AssemblyPath,
    ReconstructionPlan, TransportData,
};
use crate::basis::{bounding_box, build_product_tables, Normalization};
use crate::geometry::{build_facet_lattice, shapes, Polytope};
use crate::homint::{compute_integrals, monomial_set, IntegrationOptions};
use crate::mesh::{agglomerate, load_mesh, structured_mesh, MeshElement, PolytopicMesh};
use crate::quadrature::{monomial_moments, polytope_rule, TessellationMode};
use crate::solver::{broken_l2_error, flow_order, solve, FlowResult};
use crate::{Error, Point, Result};
use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

/// Shape or mesh named by a short spec such as `ngon:6` or `tets:2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ShapeSpec {
    Ngon(usize),
    Simplex(usize),
    Cube(usize),
    Prism(usize),
    Pyramid(usize),
    Tris(u32),
    Tets(u32),
    AggloTris(u32),
    AggloTets(u32),
    File(PathBuf),
}

impl fmt::Display for ShapeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShapeSpec::Ngon(n) => write!(f, "ngon:{n}"),
            ShapeSpec::Simplex(d) => write!(f, "simplex:{d}"),
            ShapeSpec::Cube(d) => write!(f, "cube:{d}"),
            ShapeSpec::Prism(n) => write!(f, "prism:{n}"),
            ShapeSpec::Pyramid(n) => write!(f, "pyramid:{n}"),
            ShapeSpec::Tris(l) => write!(f, "tris:{l}"),
            ShapeSpec::Tets(l) => write!(f, "tets:{l}"),
            ShapeSpec::AggloTris(l) => write!(f, "agglo-tris:{l}"),
            ShapeSpec::AggloTets(l) => write!(f, "agglo-tets:{l}"),
            ShapeSpec::File(p) => write!(f, "{}", p.display()),
        }
    }
}

/// Parse a spec; `kind:a..b` expands to the inclusive range.
pub fn parse_shape_specs(s: &str) -> Result<Vec<ShapeSpec>> {
    let bad = || Error::InvalidInput(format!("invalid shape spec '{s}'"));
    let Some((kind, arg)) = s.split_once(':') else {
        return Err(bad());
    };
    let (lo, hi) = match arg.split_once("..") {
        Some((a, b)) => (
            a.parse::<usize>().map_err(|_| bad())?,
            b.parse::<usize>().map_err(|_| bad())?,
        ),
        None => {
            let v = arg.parse::<usize>().map_err(|_| bad())?;
            (v, v)
        }
    };
    if lo > hi {
        return Err(bad());
    }
    (lo..=hi)
        .map(|v| {
            let spec = match kind {
                "ngon" => ShapeSpec::Ngon(v),
                "simplex" => ShapeSpec::Simplex(v),
                "cube" => ShapeSpec::Cube(v),
                "prism" => ShapeSpec::Prism(v),
                "pyramid" => ShapeSpec::Pyramid(v),
                "tris" => ShapeSpec::Tris(v as u32),
                "tets" => ShapeSpec::Tets(v as u32),
                "agglo-tris" => ShapeSpec::AggloTris(v as u32),
                "agglo-tets" => ShapeSpec::AggloTets(v as u32),
                _ => return Err(bad()),
            };
            Ok(spec)
        })
        .collect()
}

impl FromStr for ShapeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut v = parse_shape_specs(s)?;
        if v.len() != 1 {
            return Err(Error::InvalidInput(format!("'{s}' names more than one shape")));
        }
        Ok(v.remove(0))
    }
}

impl ShapeSpec {
    /// The single polytope this shape names, if it is one.
    pub fn polytope(&self) -> Result<Option<Polytope>> {
        Ok(Some(match *self {
            ShapeSpec::Ngon(n) => shapes::regular_polygon(n)?,
            ShapeSpec::Simplex(d) => shapes::simplex(d)?,
            ShapeSpec::Cube(d) => shapes::hypercube(d)?,
            ShapeSpec::Prism(n) => shapes::prism(n)?,
            ShapeSpec::Pyramid(n) => shapes::pyramid(n)?,
            _ => return Ok(None),
        }))
    }

    /// The shape as a mesh; a single polytope becomes a one-element mesh and
    /// agglomerated meshes coarsen about tenfold.
    pub fn mesh(&self, seed: u64) -> Result<PolytopicMesh> {
        if let Some(p) = self.polytope()? {
            return single_element_mesh(&p);
        }
        match self {
            ShapeSpec::Tris(l) => structured_mesh(2, *l),
            ShapeSpec::Tets(l) => structured_mesh(3, *l),
            ShapeSpec::AggloTris(l) | ShapeSpec::AggloTets(l) => {
                let dim = if matches!(self, ShapeSpec::AggloTris(_)) {
                    2
                } else {
                    3
                };
                let fine = structured_mesh(dim, *l)?;
                let target = ((fine.len() as f64) / 10.0).round().max(1.0) as usize;
                agglomerate(&fine, target, seed)
            }
            ShapeSpec::File(path) => load_mesh(path),
            _ => unreachable!(),
        }
    }
}

pub fn single_element_mesh(p: &Polytope) -> Result<PolytopicMesh> {
    PolytopicMesh::new(
        p.dim(),
        p.vertices().to_vec(),
        vec![MeshElement {
            loops: p.faces().to_vec(),
            fine: vec![],
        }],
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Quad,
    Qfree,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Quad => "quad",
            Method::Qfree => "qfree",
        })
    }
}

/// One CSV row. The first eleven columns mirror the plotted data files;
/// the rest are diagnostics (empty when not applicable).
#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRecord {
    pub n_sides: usize,
    pub pmax: usize,
    pub no_eles: usize,
    pub integral_timer: f64,
    pub volume_assembly_timer: f64,
    pub flops_integration: u64,
    pub flops_reconstruction: u64,
    pub lattice_V: usize,
    pub lattice_E: usize,
    pub method: String,
    pub pruned: bool,
    pub shape: String,
    pub reconstruction_visits: u64,
    pub quadrature_points: u64,
    pub max_rel_discrepancy: Option<f64>,
    pub l2_error: Option<f64>,
}

impl BenchRecord {
    fn new(shape: &ShapeSpec, p: usize, method: Method, pruned: bool) -> Self {
        BenchRecord {
            n_sides: 0,
            pmax: p,
            no_eles: 1,
            integral_timer: 0.0,
            volume_assembly_timer: 0.0,
            flops_integration: 0,
            flops_reconstruction: 0,
            lattice_V: 0,
            lattice_E: 0,
            method: method.to_string(),
            pruned,
            shape: shape.to_string(),
            reconstruction_visits: 0,
            quadrature_points: 0,
            max_rel_discrepancy: None,
            l2_error: None,
        }
    }

    fn key(&self) -> (String, usize, String, bool) {
        (
            self.shape.clone(),
            self.pmax,
            self.method.clone(),
            self.pruned,
        )
    }
}

/// Sort rows canonically and write CSV with a header; `timers = false`
/// writes zero timers for byte reproducible output.
pub fn write_records<W: Write>(records: &[BenchRecord], w: W, timers: bool) -> Result<()> {
    let mut rows = records.to_vec();
    rows.sort_by_key(|a| a.key());
    let mut wr = csv::Writer::from_writer(w);
    for mut r in rows {
        if !timers {
            r.integral_timer = 0.0;
            r.volume_assembly_timer = 0.0;
        }
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn records_to_csv(records: &[BenchRecord], timers: bool) -> Result<String> {
    let mut buf = Vec::new();
    write_records(records, &mut buf, timers)?;
    Ok(String::from_utf8(buf).expect("CSV is UTF-8"))
}

fn facet_sides(p: &Polytope) -> usize {
    p.faces().first().map_or(0, |_| {
        if p.dim() == 2 {
            p.faces()[0].len()
        } else {
            p.faces().len()
        }
    })
}

/// Lattice sizes with the empty facet, summed over the elements.
fn lattice_sizes(polys: &[&Polytope]) -> Result<(usize, usize)> {
    let mut v = 0;
    let mut e = 0;
    for p in polys {
        let (a, b) = build_facet_lattice(p, false)?.counts().with_empty();
        v += a;
        e += b;
    }
    Ok((v, e))
}

/// `max_α |I_h(α) − I_q(α)| / Σ_i w_i |x_i^α|`: discrepancies measured
/// against the size of the integrand, so vanishing moments stay meaningful.
pub fn monomial_discrepancy(p: &Polytope, pmax: usize, pruned: bool) -> Result<f64> {
    let set = monomial_set(pmax, p.dim());
    let lattice = build_facet_lattice(p, false)?;
    let table = compute_integrals(
        &lattice,
        &set,
        IntegrationOptions {
            pruning: pruned,
            ..Default::default()
        },
    )?;
    let rule = polytope_rule(p, pmax, integration_mode(p))?;
    let (quad, _) = monomial_moments(&rule, &set);
    let mut worst: f64 = 0.0;
    for (i, a) in set.indices().iter().enumerate() {
        let scale: f64 = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(x, w)| {
                (w * (0..p.dim())
                    .map(|k| x[k].powi(a.get(k) as i32))
                    .product::<f64>())
                .abs()
            })
            .sum();
        let diff = (table.top_values()[i] - quad[i]).abs();
        worst = worst.max(if scale > 0.0 { diff / scale } else { diff });
    }
    Ok(worst)
}

#[derive(Clone, Debug)]
pub struct IntegrateJob {
    pub shape: ShapeSpec,
    pub p: usize,
    pub methods: Vec<Method>,
    pub pruned: bool,
}

/// Integrate `{|α| ≤ p}` over a shape (every element of a mesh).
pub fn run_integrate(job: &IntegrateJob, seed: u64) -> Result<Vec<BenchRecord>> {
    let mesh;
    let single;
    let polys: Vec<&Polytope> = match job.shape.polytope()? {
        Some(p) => {
            single = p;
            vec![&single]
        }
        None => {
            mesh = job.shape.mesh(seed)?;
            (0..mesh.len()).map(|e| mesh.polytope(e)).collect()
        }
    };
    let (lv, le) = lattice_sizes(&polys)?;
    let n_sides = if polys.len() == 1 {
        facet_sides(polys[0])
    } else {
        0
    };
    let mut out = Vec::new();
    for &m in &job.methods {
        let mut r = BenchRecord::new(&job.shape, job.p, m, job.pruned);
        r.n_sides = n_sides;
        r.no_eles = polys.len();
        r.lattice_V = lv;
        r.lattice_E = le;
        let set = monomial_set(job.p, polys[0].dim());
        let t = Instant::now();
        for p in &polys {
            match m {
                Method::Qfree => {
                    let lattice = build_facet_lattice(p, false)?;
                    let opts = IntegrationOptions {
                        pruning: job.pruned,
                        ..Default::default()
                    };
                    r.flops_integration +=
                        compute_integrals(&lattice, &set, opts)?.counters().flops;
                }
                Method::Quad => {
                    let rule = polytope_rule(p, job.p, integration_mode(p))?;
                    r.quadrature_points += rule.len() as u64;
                    r.flops_integration += monomial_moments(&rule, &set).1;
                }
            }
        }
        r.integral_timer = t.elapsed().as_secs_f64();
        out.push(r);
    }
    if job.methods.len() == 2 {
        let mut worst: f64 = 0.0;
        for p in &polys {
            worst = worst.max(monomial_discrepancy(p, job.p, job.pruned)?);
        }
        for r in &mut out {
            r.max_rel_discrepancy = Some(worst);
        }
    }
    Ok(out)
}

fn integration_mode(p: &Polytope) -> TessellationMode {
    if p.fine().is_some() {
        TessellationMode::Inherited
    } else {
        TessellationMode::FanFirstVertex
    }
}

#[derive(Clone, Debug)]
pub struct AssembleJob {
    pub shape: ShapeSpec,
    pub p: usize,
    pub methods: Vec<Method>,
    pub pruned: bool,
}

/// Volume matrices of every element by the requested paths.
pub fn run_assemble(job: &AssembleJob, seed: u64) -> Result<Vec<BenchRecord>> {
    let mesh = job.shape.mesh(seed)?;
    let d = mesh.dim();
    let data = default_data(d)?;
    let polys: Vec<&Polytope> = (0..mesh.len()).map(|e| mesh.polytope(e)).collect();
    let (lv, le) = lattice_sizes(&polys)?;
    let norm = Normalization::Orthonormal;
    let opts = IntegrationOptions {
        pruning: job.pruned,
        ..Default::default()
    };
    let mut out = Vec::new();
    let mut mats: Vec<Vec<nalgebra::DMatrix<f64>>> = Vec::new();
    for &m in &job.methods {
        let mut r = BenchRecord::new(&job.shape, job.p, m, job.pruned);
        r.n_sides = if mesh.len() == 1 {
            facet_sides(polys[0])
        } else {
            0
        };
        r.no_eles = mesh.len();
        r.lattice_V = lv;
        r.lattice_E = le;
        let mut list = Vec::with_capacity(mesh.len());
        match m {
            Method::Qfree => {
                let t = Instant::now();
                let tables = build_product_tables(job.p, norm)?;
                let plan = ReconstructionPlan::new(job.p, d, &tables)?;
                // Integration stage alone, for the timer.
                let ti = Instant::now();
                for p in &polys {
                    let khat = bounding_box(p)?.map_polytope(p);
                    compute_integrals(&build_facet_lattice(&khat, false)?, plan.monomials(), opts)?;
                }
                r.integral_timer = ti.elapsed().as_secs_f64();
                for (e, p) in polys.iter().enumerate() {
                    let a = element_matrix_qfree(p, e, &data, &plan, opts)?;
                    r.flops_integration += a.counters.integration_flops;
                    r.flops_reconstruction += a.counters.main_flops;
                    r.reconstruction_visits += a.counters.reconstruction_visits;
                    list.push(a.matrix);
                }
                r.volume_assembly_timer = t.elapsed().as_secs_f64() - r.integral_timer;
            }
            Method::Quad => {
                let t = Instant::now();
                let rules = polys
                    .iter()
                    .map(|p| element_rule(p, job.p))
                    .collect::<Result<Vec<_>>>()?;
                r.integral_timer = t.elapsed().as_secs_f64();
                for (e, (p, rule)) in polys.iter().zip(&rules).enumerate() {
                    let a = element_matrix_quadrature(p, e, &data, job.p, rule, norm)?;
                    r.flops_reconstruction += a.counters.main_flops;
                    r.quadrature_points += a.counters.quadrature_points as u64;
                    list.push(a.matrix);
                }
                r.volume_assembly_timer = t.elapsed().as_secs_f64() - r.integral_timer;
            }
        }
        mats.push(list);
        out.push(r);
    }
    if mats.len() == 2 {
        let worst = mats[0]
            .iter()
            .zip(&mats[1])
            .map(|(a, b)| (a - b).amax() / a.amax().max(b.amax()))
            .fold(0.0, f64::max);
        for r in &mut out {
            r.max_rel_discrepancy = Some(worst);
        }
    }
    Ok(out)
}

fn wind(d: usize) -> Point {
    if d == 2 {
        Point::new(1.0, 0.6, 0.0)
    } else {
        Point::new(1.0, 0.6, 0.3)
    }
}

/// Data used for assembly benchmarks: the smooth registry case.
fn default_data(d: usize) -> Result<TransportData> {
    Ok(solve_case("smooth", d)?.data)
}

/// A named transport problem and, when known, its exact solution.
pub struct SolveCase {
    pub data: TransportData,
    pub exact: Option<fn(&Point) -> f64>,
}

pub const SOLVE_CASES: [&str; 5] = ["const", "poly1", "poly2", "smooth", "source-only"];

/// Registry of manufactured problems with wind `(1, 0.6[, 0.3])`.
pub fn solve_case(name: &str, d: usize) -> Result<SolveCase> {
    type F = fn(&Point) -> f64;
    type G = fn(&Point) -> Point;
    let pick: Option<(F, G, f64)> = match name {
        "const" => Some((|_| 1.0, |_| Point::zeros(), 1.0)),
        "poly1" => Some((
            |x| 1.0 + x.x - 2.0 * x.y + 0.5 * x.z,
            |_| Point::new(1.0, -2.0, 0.5),
            1.0,
        )),
        "poly2" => Some((
            |x| x.x * x.y - x.x * x.x + x.z * x.z + 0.5,
            |x| Point::new(x.y - 2.0 * x.x, x.x, 2.0 * x.z),
            0.7,
        )),
        "smooth" => Some((
            |x| (2.0 * x.x).sin() * x.y.cos() * x.z.exp(),
            |x| {
                let (s, c, e) = ((2.0 * x.x).sin(), x.y.cos(), x.z.exp());
                Point::new(
                    2.0 * (2.0 * x.x).cos() * c * e,
                    -s * x.y.sin() * e,
                    s * c * e,
                )
            },
            1.0,
        )),
        "source-only" => None,
        _ => return Err(Error::InvalidInput(format!("unknown data case '{name}'"))),
    };
    let b = wind(d);
    Ok(match pick {
        Some((u, grad, c)) => {
            let data = TransportData::constant(b, c, move |x| b.dot(&grad(x)) + c * u(x), u)?;
            SolveCase {
                data,
                exact: Some(u),
            }
        }
        None => SolveCase {
            data: TransportData::constant(b, 1.0, |_| 1.0, |_| 0.0)?,
            exact: None,
        },
    })
}

/// Assemble and solve a registry problem; returns the record and the
/// coefficient vector.
pub fn run_solve(
    shape: &ShapeSpec,
    p: usize,
    case: &str,
    path: AssemblyPath,
    seed: u64,
) -> Result<(BenchRecord, DVector<f64>, usize)> {
    let mesh = shape.mesh(seed)?;
    let c = solve_case(case, mesh.dim())?;
    let opts = AssemblyOptions {
        path,
        ..Default::default()
    };
    let t = Instant::now();
    let sys = crate::assembly::assemble_global(&mesh, &c.data, p, opts)?;
    let assembly_time = t.elapsed().as_secs_f64();
    let x = match flow_order(&mesh, &c.data.wind) {
        FlowResult::Order(o) => solve(&sys, Some(&o))?,
        FlowResult::Cycle(_) => solve(&sys, None)?,
    };
    let method = if path == AssemblyPath::Quadrature {
        Method::Quad
    } else {
        Method::Qfree
    };
    let mut r = BenchRecord::new(shape, p, method, opts.homint.pruning);
    r.no_eles = mesh.len();
    r.volume_assembly_timer = assembly_time;
    r.flops_integration = sys.stats.integration_flops;
    r.flops_reconstruction = sys.stats.volume_flops;
    r.reconstruction_visits = sys.stats.reconstruction_visits;
    r.quadrature_points = sys.stats.quadrature_points;
    if let Some(u) = c.exact {
        r.l2_error = Some(broken_l2_error(&mesh, &x, u, p, opts.norm)?);
    }
    Ok((r, x, sys.block_size))
}

/// Lattice statistics row.
#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LatticeRecord {
    pub shape: String,
    pub dim: usize,
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub lattice_V: usize,
    pub lattice_E: usize,
    pub lattice_V_no_empty: usize,
    pub lattice_E_no_empty: usize,
}

pub fn run_lattice_stats(shape: &ShapeSpec) -> Result<LatticeRecord> {
    let p = shape
        .polytope()?
        .ok_or_else(|| Error::InvalidInput(format!("'{shape}' is not a single polytope")))?;
    let l = build_facet_lattice(&p, false)?;
    let c = l.counts();
    let (v, e) = c.with_empty();
    let (v0, e0) = c.without_empty();
    Ok(LatticeRecord {
        shape: shape.to_string(),
        dim: p.dim(),
        vertices: l.count_dim(0),
        edges: l.count_dim(1),
        faces: if p.dim() == 3 { l.count_dim(2) } else { 0 },
        lattice_V: v,
        lattice_E: e,
        lattice_V_no_empty: v0,
        lattice_E_no_empty: e0,
    })
}

pub fn write_lattice_records<W: Write>(records: &[LatticeRecord], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in records {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

/// Run integrate jobs in parallel; rows come back in canonical order.
pub fn integrate_all(jobs: &[IntegrateJob], seed: u64) -> Result<Vec<BenchRecord>> {
    let rows: Vec<Vec<BenchRecord>> = jobs
        .par_iter()
        .map(|j| run_integrate(j, seed))
        .collect::<Result<_>>()?;
    let mut out: Vec<BenchRecord> = rows.into_iter().flatten().collect();
    out.sort_by_key(|a| a.key());
    Ok(out)
}

pub fn assemble_all(jobs: &[AssembleJob], seed: u64) -> Result<Vec<BenchRecord>> {
    let rows: Vec<Vec<BenchRecord>> = jobs
        .par_iter()
        .map(|j| run_assemble(j, seed))
        .collect::<Result<_>>()?;
    let mut out: Vec<BenchRecord> = rows.into_iter().flatten().collect();
    out.sort_by_key(|a| a.key());
    Ok(out)
}
