mod common;

use apc_lab::experiments::Lab;
use apc_lab::radial::{make_grid, Channel, PotentialSpec, Shape};
use apc_lab::spectral::{
    assemble_operator, bound_state_curve, critical_state, derivative_of_bound_state_scan, find_critical_coupling, gap_eigenpairs, principal_state,
    resolvent_norm_scan, EDGE_TOL,
};
use apc_lab::{Exec, LabError};
use common::{dense, lab, raw, sorted_eigenvalues};
use nalgebra::DMatrix;

#[test]
fn free_operator_has_no_gap_states() {
    for (l, n) in [(3.2, 64), (12.8, 256), (51.2, 1024)] {
        let grid = make_grid(l, n).unwrap();
        let h = grid.h();
        for ch in [Channel::Plus, Channel::Minus] {
            let op = assemble_operator(&grid, ch, &raw(), 0.0).unwrap();
            let inside = op.matrix().count_below(1.0 - 10.0 * h * h) - op.matrix().count_below(-(1.0 - 10.0 * h * h));
            assert_eq!(inside, 0, "{ch:?} L={l} N={n}");
            assert!(gap_eigenpairs(&op).unwrap().is_empty());
        }
    }
}

#[test]
fn coupling_enters_only_the_diagonal() {
    let grid = make_grid(6.4, 128).unwrap();
    let pot = raw();
    let a = assemble_operator(&grid, Channel::Plus, &pot, 0.0).unwrap();
    let b = assemble_operator(&grid, Channel::Plus, &pot, 0.5).unwrap();
    assert_eq!(a.off_diag(), b.off_diag());
    for i in 0..grid.dim() {
        let want = 0.5 * pot.eval(grid.r(i));
        assert!((b.diag()[i] - a.diag()[i] - want).abs() < 1e-14, "node {i}");
    }
    assert_eq!(a.with_coupling(0.5), b);
}

#[test]
fn banded_matches_dense_at_64_nodes() {
    let grid = make_grid(3.2, 64).unwrap();
    let op = assemble_operator(&grid, Channel::Plus, &raw(), 3.0).unwrap();
    let dn = op.to_dense();
    let m = dense(op.diag(), op.off_diag());
    for i in 0..op.dim() {
        for j in 0..op.dim() {
            assert_eq!(dn[i][j], m[(i, j)]);
        }
    }
    let want = sorted_eigenvalues(m);
    let got = op.matrix().eigenvalues(0..op.dim(), Exec::Serial);
    for (a, b) in got.iter().zip(&want) {
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
}

#[test]
fn eigenvectors_have_small_residuals() {
    let grid = make_grid(12.8, 256).unwrap();
    let op = assemble_operator(&grid, Channel::Plus, &raw(), 4.0).unwrap();
    let pairs = op.matrix().eigenpairs(0..op.dim(), Exec::default()).unwrap();
    let scale = op.norm_bound();
    for (l, v) in pairs.values.iter().zip(&pairs.vectors) {
        assert!(op.matrix().residual(*l, v) <= 1e-10 * scale);
    }
    let n = pairs.vectors.len();
    for a in (0..n).step_by(37) {
        for b in (0..n).step_by(41) {
            let d: f64 = pairs.vectors[a].iter().zip(&pairs.vectors[b]).map(|(x, y)| x * y).sum();
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((d - want).abs() < 1e-10, "({a},{b}) {d}");
        }
    }
}

#[test]
fn state_appears_just_above_binding_threshold() {
    let lab = lab();
    let grid = lab.grid_nodes(256).unwrap();
    let op = lab.operator(&grid, 0.0).unwrap();
    let curve = bound_state_curve(&op, 0.0, 1.0, 101, Exec::default()).unwrap();
    let mu_b = curve.mu_b.unwrap();
    // bisect the binding threshold against the dense oracle
    let count = |mu: f64| {
        let o = op.with_coupling(mu);
        sorted_eigenvalues(dense(o.diag(), o.off_diag())).iter().filter(|e| e.abs() < 1.0).count()
    };
    let (mut a, mut b) = (mu_b - 0.01, mu_b);
    assert_eq!(count(a), 0);
    assert_eq!(count(b), 1);
    for _ in 0..30 {
        let m = 0.5 * (a + b);
        if count(m) == 0 {
            a = m;
        } else {
            b = m;
        }
    }
    let states = gap_eigenpairs(&op.with_coupling(b + 1e-6)).unwrap();
    assert_eq!(states.len(), 1);
    // the branch enters from the lower continuum
    assert!(states[0].energy < -0.99, "{}", states[0].energy);
    assert!(gap_eigenpairs(&op.with_coupling(a)).unwrap().is_empty());
}

#[test]
fn calibrated_edge_state() {
    let lab = lab();
    let grid = lab.grid(40.0).unwrap();
    let op = lab.operator(&grid, 1.0).unwrap();
    let states = gap_eigenpairs(&op).unwrap();
    assert_eq!(states.len(), 1);
    assert!((states[0].energy - 1.0).abs() <= 1e-6);
    let phi = critical_state(&op).unwrap();
    assert!(phi.residual <= 1e-8 * (1.0 + lab.potential.max_value()));
    let below = principal_state(&op.with_coupling(1.0 - 1e-3)).unwrap().unwrap();
    assert!(below.energy < 1.0 - EDGE_TOL);
}

#[test]
fn shallow_well_never_becomes_critical() {
    let grid = make_grid(40.0, 800).unwrap();
    let mut pot = PotentialSpec::new(0.1, 0.5, Shape::SmoothBump).unwrap();
    assert!(matches!(find_critical_coupling(&grid, Channel::Plus, &mut pot, 1e-12), Err(LabError::NoCriticalCoupling { .. })));
    assert_eq!(pot.rescale_factor, 1.0);
}

#[test]
fn critical_coupling_under_refinement() {
    let pot = PotentialSpec::new(2.0, 1.0, Shape::SmoothBump).unwrap();
    let run = |n| {
        let grid = make_grid(40.0, n).unwrap();
        let mut p = pot;
        find_critical_coupling(&grid, Channel::Plus, &mut p, 1e-13).unwrap()
    };
    let a = run(1024);
    assert!((run(1024) - a).abs() <= 1e-8 * a);
    let b = run(2048);
    assert!((a - b).abs() <= 0.01 * b, "{a} vs {b}");
}

#[test]
fn bound_state_is_box_independent() {
    let lab = lab();
    for mu in [0.7, 0.9, 0.99] {
        let a = lab.state_at(&lab.grid(40.0).unwrap(), mu).unwrap().energy;
        let b = lab.state_at(&lab.grid(80.0).unwrap(), mu).unwrap().energy;
        assert!((a - b).abs() < 1e-6, "mu = {mu}: {a} vs {b}");
    }
}

#[test]
fn curve_rows_and_edge_approach() {
    let lab = lab();
    let grid = lab.grid(40.0).unwrap();
    let curve = bound_state_curve(&lab.operator(&grid, 0.0).unwrap(), 0.0, 1.0, 101, Exec::default()).unwrap();
    assert!(curve.strictly_increasing());
    let max = curve.rows.iter().map(|r| r.slope).fold(0.0, f64::max);
    assert!(curve.rows.iter().all(|r| r.slope > 0.0 && r.slope < 2.0 * max));
    let near = lab.state_at(&grid, 1.0 - 1e-4).unwrap().energy;
    assert!((1.0 - 1e-2..1.0).contains(&near), "{near}");
    let last = curve.rows.last().unwrap();
    assert!((last.mu - 1.0).abs() < 1e-12 && (last.energy - 1.0).abs() < 1e-6);
}

#[test]
fn curve_serial_and_parallel_agree() {
    let lab = lab();
    let grid = lab.grid(20.0).unwrap();
    let op = lab.operator(&grid, 0.0).unwrap();
    let a = bound_state_curve(&op, 0.5, 1.0, 21, Exec::Serial).unwrap();
    let b = bound_state_curve(&op, 0.5, 1.0, 21, Exec::Parallel).unwrap();
    assert_eq!(a, b);
}

#[test]
fn derivative_scan_is_order_one_away_from_edge() {
    let lab = lab();
    let grid = lab.grid(25.0).unwrap();
    let op = lab.operator(&grid, 1.0).unwrap();
    let mu = [0.7, 0.8, 0.9, 0.95, 0.98];
    let d = derivative_of_bound_state_scan(&op, &mu, 1e-4, Exec::default()).unwrap();
    assert!(d.quotient[0] > 0.1 && d.quotient[0] < 10.0, "{}", d.quotient[0]);
    assert!(d.overlap.iter().all(|o| *o > 0.99));
    assert!(-d.fit.slope <= 13.0 / 16.0 + 0.1);
}

fn dense_resolvent_norm(lab: &Lab, nodes: usize, mu: f64, radius: f64) -> f64 {
    let grid = lab.grid_nodes(nodes).unwrap();
    let d1 = lab.operator(&grid, 1.0).unwrap();
    let e = principal_state(&d1.with_coupling(mu)).unwrap().unwrap().energy;
    let n = d1.dim();
    let h = grid.h();
    let phi: Vec<f64> = critical_state(&d1).unwrap().vector.data().iter().map(|z| z.re * h.sqrt()).collect();
    let m = dense(d1.diag(), d1.off_diag()) - DMatrix::identity(n, n) * e;
    let inv = m.try_inverse().unwrap();
    let p = DMatrix::identity(n, n) - DMatrix::from_fn(n, n, |i, j| phi[i] * phi[j]);
    let support = grid.nodes_within(radius);
    let a = DMatrix::from_fn(n, support, |i, j| if i == j { d1.well()[i] } else { 0.0 });
    let r = &p * inv * &p * a;
    r.singular_values().max()
}

#[test]
fn resolvent_norm_matches_dense_oracle() {
    let lab = lab();
    let grid = lab.grid_nodes(256).unwrap();
    let op = lab.operator(&grid, 1.0).unwrap();
    let curve = bound_state_curve(&op, 0.0, 1.0, 101, Exec::default()).unwrap();
    let mu = curve.mu_b.unwrap();
    let scan = resolvent_norm_scan(&op, &[mu, 0.9, 0.95, 0.98], 4, 0.5, 3, Exec::default()).unwrap();
    let want = dense_resolvent_norm(&lab, 256, mu, 0.5);
    let got = scan.norm[0];
    assert!(got <= want * (1.0 + 1e-8) && got >= 0.1 * want, "{got} vs {want}");
    assert!(scan.norm.iter().all(|x| x.is_finite()));
}
