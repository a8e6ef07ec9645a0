use kbsyk::equilibrium::{solve_equilibrium, lay_initial_condition, EquilibriumParams};
use kbsyk::grid::TimeLattice;

fn main() {
    let lattice = TimeLattice::new(0.1, 10.0).unwrap();
    let mut p = EquilibriumParams::new(1.0, 0.5, 4);
    p.n_omega = 2048;
    p.omega_max = 8.0;
    p.tol = 1e-10;
    p.dt_sample = 0.1;
    p.t_span = 21.0;
    let eq = solve_equilibrium(&p).unwrap();
    let g = lay_initial_condition(&eq, &lattice).unwrap();
    let s = g.wigner_time_slices(0.0, f64::INFINITY).unwrap();
    println!("len {} step {}", s.retarded.len(), s.step);
    for (m, v) in s.retarded.iter().enumerate() {
        if m % 8 == 0 { println!("R({:.1}) = {:.3e}  K = {:.3e}", m as f64 * s.step, v.norm(), s.keldysh[m].norm()); }
    }
    // raw equilibrium values
    for &k in &[0i64, 50, 100, 150, 199] {
        println!("|g({})| = {:.3e}", k, eq.greater_time_at(k).norm());
    }
}
