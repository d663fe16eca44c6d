//! Surface integrals over triangle meshes for the surface representations of
//! H_σ and L_σ:
//!
//! `∫_S (z−y)·n_{A_i(z)}(y) |z−y|^{-n-σ} {1, (n+σ)ê⊗ê − 1} dy`.
//!
//! On flat facets with interpolated normals `(z−y)·n(y)` is only O(|z−y|·h), which
//! makes the integral diverge at the base vertex. The integral is therefore split by a
//! smooth partition of unity in the tangential distance: the near part is taken over a
//! local polynomial graph fitted to the surrounding vertices (where the numerator is
//! genuinely O(|z−y|²)), the far part over Phong-tessellated triangles.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::quadrature::rules::endpoint_singular;
use crate::quadrature::spec::{Diagnostics, QuadratureSpec};
use crate::surface::{Geometry, SurfaceScene, TangentFrame, TriMesh, Vec3};

/// Near-field radius in units of the local edge length.
pub const NEAR_FACTOR: f64 = 3.0;

const NEAR_RHO_NODES: usize = 48;
const NEAR_PSI_NODES: usize = 96;

// degree-4 symmetric rule on the triangle (barycentrics, weight fraction)
const TRI_RULE: [([f64; 3], f64); 6] = [
    ([0.108_103_018_168_070, 0.445_948_490_915_965, 0.445_948_490_915_965], 0.223_381_589_678_011),
    ([0.445_948_490_915_965, 0.108_103_018_168_070, 0.445_948_490_915_965], 0.223_381_589_678_011),
    ([0.445_948_490_915_965, 0.445_948_490_915_965, 0.108_103_018_168_070], 0.223_381_589_678_011),
    ([0.816_847_572_980_459, 0.091_576_213_509_771, 0.091_576_213_509_771], 0.109_951_743_655_322),
    ([0.091_576_213_509_771, 0.816_847_572_980_459, 0.091_576_213_509_771], 0.109_951_743_655_322),
    ([0.091_576_213_509_771, 0.091_576_213_509_771, 0.816_847_572_980_459], 0.109_951_743_655_322),
];

/// Raw surface integrals (without the H/L prefactors) and the frame they live in.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceIntegral {
    pub frame: TangentFrame,
    /// `∫ (z−y)·n_{A_i} |z−y|^{-3-σ} dy`
    pub scalar: f64,
    /// Same with `(3+σ)ê⊗ê − 1` in frame coordinates.
    pub tensor: [[f64; 2]; 2],
    /// Near-field share of `scalar`.
    pub near_scalar: f64,
    pub diagnostics: Diagnostics,
}

/// `1` on `[0, r/2]`, `0` beyond `r`, C^∞ in between.
pub fn cutoff(rho: f64, r: f64) -> f64 {
    let t = (rho - 0.5 * r) / (0.5 * r);
    if t <= 0.0 {
        return 1.0;
    }
    if t >= 1.0 {
        return 0.0;
    }
    let f = |s: f64| if s <= 0.0 { 0.0 } else { (-1.0 / s).exp() };
    f(1.0 - t) / (f(1.0 - t) + f(t))
}

/// Local graph `w(u) = w₂ + w₃ + w₄` over the tangent plane at a vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalGraph {
    /// Coefficients of the monomials u₁^{k−j} u₂^j, grouped by degree 2, 3, 4.
    pub coeffs: Vec<f64>,
    pub degree: usize,
    pub fit_radius: f64,
    pub fit_points: usize,
}

fn monomials(u1: f64, u2: f64, degree: usize) -> Vec<f64> {
    let mut m = Vec::new();
    for k in 2..=degree {
        for j in 0..=k {
            m.push(u1.powi((k - j) as i32) * u2.powi(j as i32));
        }
    }
    m
}

impl LocalGraph {
    /// Homogeneous parts ŵ_k(ψ) at unit radius, for k = 2, 3, 4 (zero beyond the fit degree).
    pub fn angular_parts(&self, psi: f64) -> [f64; 3] {
        let (s, c) = psi.sin_cos();
        let mut out = [0.0; 3];
        let mut idx = 0;
        for k in 2..=self.degree {
            for j in 0..=k {
                out[k - 2] += self.coeffs[idx] * c.powi((k - j) as i32) * s.powi(j as i32);
                idx += 1;
            }
        }
        out
    }

    /// Second fundamental form (Hessian of w at 0) in frame coordinates.
    pub fn hessian(&self) -> [[f64; 2]; 2] {
        [[2.0 * self.coeffs[0], self.coeffs[1]], [self.coeffs[1], 2.0 * self.coeffs[2]]]
    }
}

/// Least-squares fit of a degree-4 (or, with few points, degree-2) graph to the
/// vertices within `radius` of `z`.
pub fn fit_local_graph(mesh: &TriMesh, frame: &TangentFrame, radius: f64) -> Result<LocalGraph> {
    let z = frame.origin;
    let mut r = radius;
    for _ in 0..4 {
        let pts: Vec<(f64, f64, f64)> = mesh
            .vertices
            .iter()
            .filter(|v| {
                let d = (*v - z).norm();
                d > 0.0 && d <= r
            })
            .map(|v| {
                let d = v - z;
                (d.dot(&frame.tangents[0]), d.dot(&frame.tangents[1]), d.dot(&frame.normal))
            })
            .collect();
        let degree = if pts.len() >= 24 {
            4
        } else if pts.len() >= 6 {
            2
        } else {
            r *= 1.5;
            continue;
        };
        let cols = monomials(1.0, 1.0, degree).len();
        // scale coordinates by r for conditioning
        let mut a = DMatrix::<f64>::zeros(pts.len(), cols);
        let mut b = DVector::<f64>::zeros(pts.len());
        for (i, &(u1, u2, w)) in pts.iter().enumerate() {
            for (j, m) in monomials(u1 / r, u2 / r, degree).into_iter().enumerate() {
                a[(i, j)] = m;
            }
            b[i] = w / r;
        }
        let sol = a
            .svd(true, true)
            .solve(&b, 1e-13)
            .map_err(|e| Error::RepresentationUnavailable(format!("graph fit failed: {e}")))?;
        let mut coeffs = Vec::with_capacity(cols);
        let mut idx = 0;
        for k in 2..=degree {
            for _ in 0..=k {
                // w/r = Σ c (u/r)^k  ⇒  w = Σ c r^{1−k} u^k
                coeffs.push(sol[idx] * r.powi(1 - k as i32));
                idx += 1;
            }
        }
        return Ok(LocalGraph { coeffs, degree, fit_radius: r, fit_points: pts.len() });
    }
    Err(Error::RepresentationUnavailable("too few vertices around the base point for a local fit".into()))
}

fn add_kernel(acc_s: &mut f64, acc_t: &mut [[f64; 2]; 2], w: f64, num: f64, e: [f64; 2], sigma: f64) {
    *acc_s += w * num;
    for i in 0..2 {
        for j in 0..2 {
            let delta = if i == j { 1.0 } else { 0.0 };
            acc_t[i][j] += w * num * ((3.0 + sigma) * e[i] * e[j] - delta);
        }
    }
}

/// Phong-tessellated point (blend ½) of a triangle, its interpolated normal and area Jacobian.
fn phong(mesh: &TriMesh, tri: usize, b: [f64; 3], orient: f64) -> (Vec3, Vec3, f64) {
    let t = mesh.triangles[tri];
    let v = [mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]];
    let n = [mesh.normals[t[0]], mesh.normals[t[1]], mesh.normals[t[2]]];
    let p = b[0] * v[0] + b[1] * v[1] + b[2] * v[2];
    let proj = |i: usize| p - (p - v[i]).dot(&n[i]) * n[i];
    let pi = [proj(0), proj(1), proj(2)];
    let y = 0.5 * p + 0.5 * (b[0] * pi[0] + b[1] * pi[1] + b[2] * pi[2]);
    let dp = [v[0] - v[2], v[1] - v[2]];
    let mut d = [Vec3::zeros(); 2];
    for k in 0..2 {
        let mut acc = 0.5 * dp[k] + 0.5 * (pi[k] - pi[2]);
        for i in 0..3 {
            acc += 0.5 * b[i] * (dp[k] - dp[k].dot(&n[i]) * n[i]);
        }
        d[k] = acc;
    }
    let jac = d[0].cross(&d[1]).norm();
    let nn = (b[0] * n[0] + b[1] * n[1] + b[2] * n[2]).normalize() * orient;
    (y, nn, jac)
}

struct FarCtx<'a> {
    mesh: &'a TriMesh,
    frame: &'a TangentFrame,
    sigma: f64,
    r_near: f64,
    orient: f64,
    max_depth: usize,
    floor: f64,
}

impl FarCtx<'_> {
    /// Rule on the sub-triangle with barycentric corners `c` (param-space area `area`).
    fn rule(&self, tri: usize, c: &[[f64; 3]; 3], area: f64, a_sign: f64) -> (f64, [[f64; 2]; 2]) {
        let z = self.frame.origin;
        let mut s = 0.0;
        let mut t = [[0.0; 2]; 2];
        for (lam, w) in TRI_RULE {
            let b = [0, 1, 2].map(|k| lam[0] * c[0][k] + lam[1] * c[1][k] + lam[2] * c[2][k]);
            let (y, ny, jac) = phong(self.mesh, tri, b, self.orient);
            let d = z - y;
            let r = d.norm();
            let tan = -(d - d.dot(&self.frame.normal) * self.frame.normal);
            let rho = tan.norm();
            let cut = 1.0 - cutoff(rho, self.r_near);
            if cut == 0.0 || r == 0.0 {
                continue;
            }
            let e = [tan.dot(&self.frame.tangents[0]) / rho, tan.dot(&self.frame.tangents[1]) / rho];
            let num = a_sign * d.dot(&ny) * r.powf(-3.0 - self.sigma);
            add_kernel(&mut s, &mut t, w * area * jac * cut, num, e, self.sigma);
        }
        (s, t)
    }

    fn refine(
        &self,
        tri: usize,
        c: [[f64; 3]; 3],
        area: f64,
        a_sign: f64,
        coarse: (f64, [[f64; 2]; 2]),
        depth: usize,
    ) -> Result<(f64, [[f64; 2]; 2], usize)> {
        let mid = |i: usize, j: usize| [0, 1, 2].map(|k| 0.5 * (c[i][k] + c[j][k]));
        let (m01, m12, m20) = (mid(0, 1), mid(1, 2), mid(2, 0));
        let kids = [[c[0], m01, m20], [m01, c[1], m12], [m20, m12, c[2]], [m01, m12, m20]];
        let parts: Vec<(f64, [[f64; 2]; 2])> = kids.iter().map(|k| self.rule(tri, k, area / 4.0, a_sign)).collect();
        let fine: f64 = parts.iter().map(|p| p.0).sum();
        if (fine - coarse.0).abs() <= (0.01 * fine.abs()).max(self.floor * area) {
            let mut t = [[0.0; 2]; 2];
            for p in &parts {
                for i in 0..2 {
                    for j in 0..2 {
                        t[i][j] += p.1[i][j];
                    }
                }
            }
            return Ok((fine, t, depth));
        }
        if depth >= self.max_depth {
            return Err(Error::NearSingularityUnresolved(depth));
        }
        let mut s = 0.0;
        let mut t = [[0.0; 2]; 2];
        let mut deepest = depth;
        for (k, p) in kids.iter().zip(parts) {
            let (ks, kt, d) = self.refine(tri, *k, area / 4.0, a_sign, p, depth + 1)?;
            s += ks;
            for i in 0..2 {
                for j in 0..2 {
                    t[i][j] += kt[i][j];
                }
            }
            deepest = deepest.max(d);
        }
        Ok((s, t, deepest))
    }
}

/// Surface integral at the mesh vertex nearest to `z`.
pub fn surface_integral(scene: &SurfaceScene, z: &Vec3, sigma: f64, spec: &QuadratureSpec) -> Result<SurfaceIntegral> {
    let mesh = match scene.geometry() {
        Geometry::Mesh(m) => m.clone(),
        _ => return Err(Error::RepresentationUnavailable("surface quadrature needs a triangle mesh".into())),
    };
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::Domain(format!("sigma = {sigma} must lie in (0, 1)")));
    }
    let orient = scene.orientation();
    let mut diag = Diagnostics::default();
    let (vi, _) = mesh
        .vertices
        .iter()
        .enumerate()
        .map(|(i, v)| (i, (v - z).norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty mesh");
    let base = mesh.vertices[vi];
    if (base - z).norm() > 1e-9 * scene.scale() {
        diag.warnings.push(format!("base point snapped to vertex {vi}"));
    }
    let n = orient * mesh.normals[vi];
    let hint = if n.x.abs() <= n.y.abs() && n.x.abs() <= n.z.abs() {
        Vec3::x()
    } else if n.y.abs() <= n.z.abs() {
        Vec3::y()
    } else {
        Vec3::z()
    };
    let e1 = (hint - hint.dot(&n) * n).normalize();
    let frame = TangentFrame { origin: base, normal: n, tangents: vec![e1, n.cross(&e1)] };

    // local edge length: mean over the triangles that use the vertex
    let ring: Vec<usize> = (0..mesh.triangles.len()).filter(|&t| mesh.triangles[t].contains(&vi)).collect();
    let h = if ring.is_empty() {
        mesh.mean_edge_length()
    } else {
        ring.iter().map(|&t| mesh.edge_length(t)).sum::<f64>() / ring.len() as f64
    };
    let r_near = NEAR_FACTOR * h;

    // near field on the fitted graph
    let graph = fit_local_graph(&mesh, &frame, r_near * 1.25)?;
    let rho_rule = endpoint_singular(NEAR_RHO_NODES, sigma, r_near)?;
    let mut near_s = 0.0;
    let mut near_t = [[0.0; 2]; 2];
    let dpsi = 2.0 * PI / NEAR_PSI_NODES as f64;
    for j in 0..NEAR_PSI_NODES {
        let psi = (j as f64 + 0.5) * dpsi;
        let [w2, w3, w4] = graph.angular_parts(psi);
        let e = [psi.cos(), psi.sin()];
        for (&rho, &wr) in rho_rule.nodes.iter().zip(&rho_rule.weights) {
            let wv = rho * (w2 + rho * (w3 + rho * w4));
            let num = w2 + 2.0 * rho * w3 + 3.0 * rho * rho * w4;
            let g = rho.powf(-sigma) * num * (1.0 + wv * wv).powf(-(3.0 + sigma) / 2.0) * cutoff(rho, r_near);
            add_kernel(&mut near_s, &mut near_t, wr * dpsi, g, e, sigma);
        }
    }
    // inside the near disk A_i lies on the side opposite the normal, so n_{A_i} = n there;
    // the graph kernel uses the upward normal of the graph, i.e. n
    diag.nodes += NEAR_RHO_NODES * NEAR_PSI_NODES;

    // far field on Phong patches; the sign of n_{A_i} is probed per triangle
    let ctx = FarCtx {
        mesh: &mesh,
        frame: &frame,
        sigma,
        r_near,
        orient,
        max_depth: spec.max_refine_depth,
        floor: 1e-9 * r_near.powf(-1.0 - sigma),
    };
    let root = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut far_s = 0.0;
    let mut far_t = [[0.0; 2]; 2];
    let mut max_depth = 0;
    for tri in 0..mesh.triangles.len() {
        let [a, b, c] = mesh.corners(tri);
        let cen = (a + b + c) / 3.0;
        let tan = (cen - base) - (cen - base).dot(&n) * n;
        // wholly inside the cutoff plateau (with one edge of slack): no contribution
        if tan.norm() + mesh.edge_length(tri) * 1.5 < 0.5 * r_near {
            continue;
        }
        // probe from the flat facet: the Phong point bulges off the polyhedron the parity sees
        let (_, nc, _) = phong(&mesh, tri, [1.0 / 3.0; 3], orient);
        let a_sign = a_i_sign(scene, &frame, &cen, &nc, h)?;
        let coarse = ctx.rule(tri, &root, 0.5, a_sign);
        let near_tri = (cen - base).norm() < (NEAR_FACTOR + 1.0) * r_near;
        let (s, t) = if near_tri {
            let (s, t, d) = ctx.refine(tri, root, 0.5, a_sign, coarse, 0)?;
            max_depth = max_depth.max(d);
            (s, t)
        } else {
            coarse
        };
        far_s += s;
        for i in 0..2 {
            for j in 0..2 {
                far_t[i][j] += t[i][j];
            }
        }
        diag.nodes += TRI_RULE.len();
    }
    if max_depth > 0 {
        diag.warnings.push(format!("near-field triangles refined to depth {max_depth}"));
    }
    let mut tensor = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            tensor[i][j] = near_t[i][j] + far_t[i][j];
        }
    }
    Ok(SurfaceIntegral { frame, scalar: near_s + far_s, tensor, near_scalar: near_s, diagnostics: diag })
}

/// `+1` when the outward normal of A_i(z) at y is n(y) (the side −n(y) lies in A_i), else `−1`.
fn a_i_sign(scene: &SurfaceScene, frame: &TangentFrame, y: &Vec3, ny: &Vec3, h: f64) -> Result<f64> {
    let mut delta = 1e-3 * h;
    for _ in 0..3 {
        let probe = y - delta * ny;
        match scene.classify(&frame.origin, &frame.normal, &probe) {
            Ok(0) | Err(Error::TangencyDetected { .. }) | Err(Error::EndpointOnSurface) => delta *= 1.7,
            Ok(c) => return Ok(c as f64),
            Err(e) => return Err(e),
        }
    }
    Err(Error::RepresentationUnavailable("could not resolve the side of A_i at a facet".into()))
}

/// Log–log slope of |(z−y)·n(y)| / |z−y|^{3+σ} over mesh vertices between `lo` and `hi`
/// mesh edge lengths from the vertex nearest `z`.
pub fn kernel_exponent_fit(scene: &SurfaceScene, z: &Vec3, sigma: f64, lo: f64, hi: f64) -> Result<f64> {
    let mesh = match scene.geometry() {
        Geometry::Mesh(m) => m.clone(),
        _ => return Err(Error::RepresentationUnavailable("needs a triangle mesh".into())),
    };
    let (vi, _) = mesh
        .vertices
        .iter()
        .enumerate()
        .map(|(i, v)| (i, (v - z).norm()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty mesh");
    let base = mesh.vertices[vi];
    let h = mesh.mean_edge_length();
    let (mut sx, mut sy, mut sxx, mut sxy, mut m) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (v, nv) in mesh.vertices.iter().zip(&mesh.normals) {
        let d = base - v;
        let r = d.norm();
        if r < lo * h || r > hi * h {
            continue;
        }
        let k = d.dot(nv).abs() * r.powf(-3.0 - sigma);
        if k == 0.0 {
            continue;
        }
        let (x, y) = (r.ln(), k.ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        m += 1.0;
    }
    if m < 3.0 {
        return Err(Error::InvalidInput("not enough vertices in the fitting annulus".into()));
    }
    Ok((m * sxy - sx * sy) / (m * sxx - sx * sx))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::specfun::beta;
    use crate::surface::mesh::{disk_mesh, icosphere};

    #[test]
    fn cutoff_shape() {
        assert_eq!(cutoff(0.2, 1.0), 1.0);
        assert_eq!(cutoff(1.0, 1.0), 0.0);
        assert!((cutoff(0.75, 1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sphere_fit_recovers_curvature() {
        let m = icosphere(Vec3::zeros(), 1.0, 4).unwrap();
        let z = m.vertices[7];
        let n = m.normals[7];
        let e1 = (Vec3::x() - Vec3::x().dot(&n) * n).normalize();
        let f = TangentFrame { origin: z, normal: n, tangents: vec![e1, n.cross(&e1)] };
        let g = fit_local_graph(&m, &f, 4.0 * m.mean_edge_length()).unwrap();
        // outward normal: the sphere bends away from n, w ≈ −|u|²/2
        let hs = g.hessian();
        assert!((hs[0][0] + 1.0).abs() < 1e-3 && (hs[1][1] + 1.0).abs() < 1e-3 && hs[0][1].abs() < 1e-3);
    }

    #[test]
    fn icosphere_mean_curvature() {
        let sigma = 0.5;
        let s = SurfaceScene::mesh(Arc::new(icosphere(Vec3::zeros(), 1.0, 4).unwrap()));
        let r = surface_integral(&s, &Vec3::new(0.0, 0.0, 1.0), sigma, &QuadratureSpec::default()).unwrap();
        let h = 2.0 * r.scalar / (sigma * 2.0 * PI);
        let want = -beta((1.0 - sigma) / 2.0, 1.0).unwrap() / (sigma * 2f64.powf(sigma));
        assert!(((h - want) / want).abs() < 1e-2, "{h} vs {want}");
    }

    #[test]
    fn plane_patch_is_flat() {
        let s = SurfaceScene::mesh(Arc::new(disk_mesh(10.0, 60, 64).unwrap()));
        let r = surface_integral(&s, &Vec3::zeros(), 0.5, &QuadratureSpec::default()).unwrap();
        assert!(r.scalar.abs() < 1e-10);
        assert!(r.tensor.iter().flatten().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn kernel_exponent_on_sphere() {
        let s = SurfaceScene::mesh(Arc::new(icosphere(Vec3::zeros(), 1.0, 4).unwrap()));
        let slope = kernel_exponent_fit(&s, &Vec3::new(0.0, 0.0, 1.0), 0.5, 1.0, 6.0).unwrap();
        assert!((slope - (2.0 - 3.0 - 0.5)).abs() < 0.1, "{slope}");
    }
}
