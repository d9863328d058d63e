// Scratch driver used while pinning acceptance parameters.

use gbenj::operators::ModelParams;
use gbenj::solver::{integrate, petviashvili_solitary_wave, SolverConfig};
use gbenj::spectral::{RealField, Grid};

fn main() {
    // KdV-limit traveling wave to t = 10
    let grid = Grid::new(1024, 80.0).unwrap();
    let params = ModelParams::new(0.0, 1).unwrap();
    let u0 = RealField::from_fn(&grid, |x| -3.0 / (x / 2.0).cosh().powi(2));
    let mut cfg = SolverConfig::new(1e-3, 10.0);
    cfg.snapshot_stride = 10_000;
    let t0 = std::time::Instant::now();
    let traj = integrate(&u0, &params, &cfg, &mut []).unwrap();
    let got = traj.real(traj.len() - 1).unwrap();
    let expect = RealField::from_fn(&grid, |x| {
        let y = x + 10.0;
        // periodic image: map into [-L/2, L/2)
        let y = y - 80.0 * ((y + 40.0) / 80.0).floor();
        -3.0 / (y / 2.0).cosh().powi(2)
    });
    let mut err: f64 = 0.0;
    for (a, b) in got.values().iter().zip(expect.values()) {
        err = err.max((a - b).abs());
    }
    println!("KdV soliton t=10: L_inf err = {err:.3e} ({:?})", t0.elapsed());

    // l = 0.5 Petviashvili profile advanced by the solver over [0, 1]
    let grid = Grid::new(1024, 80.0).unwrap();
    let params = ModelParams::new(0.5, 1).unwrap();
    let t0 = std::time::Instant::now();
    let wave = petviashvili_solitary_wave(&params, -1.0, &grid, 1e-13, 400).unwrap();
    println!(
        "petviashvili l=0.5: {} iters, residual {:.3e}, time residual {:.3e} ({:?})",
        wave.iterations,
        wave.residual,
        wave.time_residual,
        t0.elapsed()
    );
    let mut cfg = SolverConfig::new(1e-3, 1.0);
    cfg.snapshot_stride = 250;
    let traj = integrate(&wave.profile, &params, &cfg, &mut []).unwrap();
    for i in 0..traj.len() {
        let t = traj.time(i);
        let got = traj.real(i).unwrap();
        let expect =
            gbenj::harness::run::translate_profile(&wave.profile, -1.0, t).unwrap();
        let mut err: f64 = 0.0;
        for (a, b) in got.values().iter().zip(expect.values()) {
            err = err.max((a - b).abs());
        }
        println!("  t={t:.2}: translate err = {err:.3e}");
    }
}
