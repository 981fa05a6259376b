//! Riemann theta with gradient, and its quasi-periodicity.

use hecke_tyurin::curve::{CurveSpec, PeriodData};
use hecke_tyurin::C64;

fn main() -> hecke_tyurin::Result<()> {
    let pd = PeriodData::compute(&CurveSpec::from_real(&[-3.0, -2.0, -0.5, 0.7, 2.0, 3.2])?)?;
    let th = pd.theta_context();
    let tau = th.tau().to_vec();
    let lam = vec![C64::new(0.3, 1.1), C64::new(-0.7, 0.4)];
    let v = th.eval(&lam)?;
    println!("Theta(lam) = {:.12}", v.value);
    println!("grad log Theta = {:.8?}", v.log_grad());
    for a in 0..2 {
        let s: Vec<C64> = (0..2).map(|b| lam[b] + tau[b][a]).collect();
        let expect = (-0.5 * tau[a][a] - lam[a]).exp() * v.value;
        println!("shift by tau e_{a}: {:.3e} relative", (th.theta(&s)? - expect).norm() / expect.norm());
    }
    Ok(())
}
