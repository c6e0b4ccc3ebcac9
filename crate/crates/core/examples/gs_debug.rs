use ighf::functionals::weighted_density;
use ighf::params::ProblemParams;
use ighf::spectral::{Field, GridSpec, RieszOp, SpectralOps, WeightCache};
use num_complex::Complex64;

fn solve_with(
    params: &ProblemParams,
    grid: &GridSpec,
    w: &WeightCache,
    label: &str,
) {
    let mut ops = SpectralOps::new(grid);
    let riesz = RieszOp::for_params(grid, params);
    let tau = (2.0 * params.p - 1.0) / (2.0 * params.p - 2.0);
    let h3 = grid.cell_volume();
    let mut q = Field::gaussian(grid, 1.0, 1.0);
    for _ in 0..250 {
        let dens = weighted_density(params, &q, w).unwrap();
        let conv = riesz.apply(&mut ops, &dens).unwrap();
        let pm1 = params.p - 1.0;
        let nl: Vec<Complex64> = conv.values().iter().zip(q.values().iter()).zip(w.samples().iter())
            .map(|((c, qq), wgt)| {
                let a = qq.re;
                let odd = if a == 0.0 { 0.0 } else { a.signum() * a.abs().powf(pm1) };
                Complex64::new(c.re * wgt * odd, 0.0)
            }).collect();
        let nl = Field::from_values(*grid, nl);
        let num = q.l2_norm_sq() + ops.grad_norm_sq(&q).unwrap();
        let den = h3 * nl.values().iter().zip(q.values().iter()).map(|(a, b)| a.re * b.re).sum::<f64>();
        let m = num / den;
        let mut hat = nl.values().to_vec();
        ops.fft_forward(&mut hat);
        let scale = m.powf(tau);
        for (v, ksq) in hat.iter_mut().zip(ops.ksq().iter()) {
            *v *= scale / (1.0 + ksq);
        }
        ops.fft_inverse(&mut hat);
        let next = Field::from_values(*grid, hat.iter().map(|v| Complex64::new(v.re, 0.0)).collect());
        let inc = next.sub_norm(&q) / q.l2_norm();
        q = next;
        if inc < 1e-11 { break; }
    }
    let mass = q.l2_norm_sq();
    let k = ops.grad_norm_sq(&q).unwrap();
    let dens = weighted_density(params, &q, w).unwrap();
    let conv = riesz.apply(&mut ops, &dens).unwrap();
    let p_val = h3 * conv.values().iter().zip(dens.values().iter()).map(|(a, b)| a.re * b.re).sum::<f64>();
    let eps = p_val * params.gn_b / (2.0 * params.p * k) - 1.0;
    let r1 = k * params.gn_a / (params.gn_b * mass) - 1.0;
    println!("{label}: eps(r2)={eps:+.4e} r1={r1:+.4e}  M={mass:.5} K={k:.5} P={p_val:.5} K+M-P={:+.2e}", k + mass - p_val);
}

fn main() {
    let params = ProblemParams::derive(2.0, 0.5, 2.5).unwrap();
    let g32 = GridSpec::new(32, 12.0, true).unwrap();
    let g64a = GridSpec::new(64, 12.0, true).unwrap();
    let g64 = GridSpec::new(64, 16.0, true).unwrap();
    let g128 = GridSpec::new(128, 16.0, true).unwrap();

    solve_with(&params, &g32, &WeightCache::point_sampled(&g32, params.b, 0.0).unwrap(), "n=32 L=12 point   ");
    solve_with(&params, &g32, &WeightCache::new(&g32, params.b, 0.0).unwrap(),          "n=32 L=12 averaged");
    let h = g32.spacing();
    solve_with(&params, &g32, &WeightCache::point_sampled(&g32, params.b, h).unwrap(),  "n=32 L=12 eps=h   ");
    solve_with(&params, &g32, &WeightCache::point_sampled(&g32, 0.05, 0.0).unwrap(),    "n=32 L=12 b=0.05  ");
    solve_with(&params, &g64a, &WeightCache::point_sampled(&g64a, params.b, 0.0).unwrap(), "n=64 L=12 point   ");
    solve_with(&params, &g64, &WeightCache::point_sampled(&g64, params.b, 0.0).unwrap(), "n=64 L=16 point   ");
    solve_with(&params, &g64, &WeightCache::new(&g64, params.b, 0.0).unwrap(),           "n=64 L=16 averaged");
    solve_with(&params, &g128, &WeightCache::point_sampled(&g128, params.b, 0.0).unwrap(), "n=128 L=16 point  ");
}
