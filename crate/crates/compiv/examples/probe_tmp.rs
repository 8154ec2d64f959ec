use compiv::datagen::preset;
use compiv::logratio::{ilr, LogRatioBasis};
use compiv::rng::stream_rng;
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;

fn gk(a: &DMatrix<f64>, b: &DMatrix<f64>, bw: f64) -> DMatrix<f64> {
    let mut k = DMatrix::zeros(a.nrows(), b.nrows());
    for i in 0..a.nrows() {
        for j in 0..b.nrows() {
            let mut d = 0.0;
            for c in 0..a.ncols() {
                let diff = a[(i, c)] - b[(j, c)];
                d += diff * diff;
            }
            k[(i, j)] = (-d / (2.0 * bw)).exp();
        }
    }
    k
}

fn med_bw(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let take = n.min(500);
    let stride = (n as f64 / take as f64).max(1.0);
    let idx: Vec<usize> = (0..take)
        .map(|i| ((i as f64 * stride) as usize).min(n - 1))
        .collect();
    let mut dists = Vec::new();
    for a in 0..idx.len() {
        for b in (a + 1)..idx.len() {
            let mut d = 0.0;
            for j in 0..m.ncols() {
                let diff = m[(idx[a], j)] - m[(idx[b], j)];
                d += diff * diff;
            }
            dists.push(d);
        }
    }
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    dists[dists.len() / 2]
}

fn solve(m: &DMatrix<f64>, shift: f64, rhs: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let mut jitter = 0.0;
    for attempt in 0..8 {
        let mut a = m.clone();
        for i in 0..n {
            a[(i, i)] += shift + jitter;
        }
        if let Some(chol) = a.cholesky() {
            return chol.solve(rhs);
        }
        jitter = if attempt == 0 { 1e-10 } else { jitter * 100.0 };
    }
    panic!("indefinite");
}

fn main() {
    let spec = preset("A-p3").unwrap();
    for seed in [0u64, 1] {
        let sc = spec.materialize(seed).unwrap();
        let ds = sc.generate(spec.n).unwrap();
        let truth = sc.ground_truth().unwrap();
        let xs = sc.interventional_sample(spec.m_interventions).unwrap();
        let basis = LogRatioBasis::helmert(3).unwrap();
        let n_all = ds.n();
        let x = {
            let mut t = DMatrix::zeros(n_all, 2);
            for (i, c) in ds.x.iter().enumerate() {
                let co = ilr(c, &basis).unwrap();
                t[(i, 0)] = co[0];
                t[(i, 1)] = co[1];
            }
            t
        };
        let z = ds.z.clone();
        let y = ds.y.clone();
        let fx_t = truth.true_effects(&xs).unwrap();
        let xs_ilr = {
            let mut t = DMatrix::zeros(xs.len(), 2);
            for (i, c) in xs.iter().enumerate() {
                let co = ilr(c, &basis).unwrap();
                t[(i, 0)] = co[0];
                t[(i, 1)] = co[1];
            }
            t
        };

        let mut order: Vec<usize> = (0..n_all).collect();
        let mut rng = stream_rng(0, 7001);
        order.shuffle(&mut rng);
        let n = n_all / 2;
        let m = n_all - n;
        let s1 = &order[..n];
        let s2 = &order[n..];
        let take = |rows: &[usize], src: &DMatrix<f64>| {
            DMatrix::from_fn(rows.len(), src.ncols(), |i, j| src[(rows[i], j)])
        };
        let x1 = take(s1, &x);
        let z1 = take(s1, &z);
        let y1 = DVector::from_fn(n, |i, _| y[s1[i]]);
        let x2 = take(s2, &x);
        let z2 = take(s2, &z);
        let y2 = DVector::from_fn(m, |i, _| y[s2[i]]);

        let bw_x_med = med_bw(&x);
        let bw_z_med = med_bw(&z);
        println!("== seed {seed}: bw_x_med {bw_x_med:.4} bw_z_med {bw_z_med:.4} ==");

        let k_xx_ref = gk(&x1, &x1, bw_x_med);
        let k_x_tilde_ref = gk(&x1, &x2, bw_x_med);
        let k_zz = gk(&z1, &z1, bw_z_med);
        let k_z_tilde = gk(&z1, &z2, bw_z_med);

        // stage-1 errors over lambda
        let lambdas: Vec<f64> = (0..10)
            .map(|i| (1e-6f64.ln() + (0.0 - 1e-6f64.ln()) * i as f64 / 9.0).exp())
            .collect();
        let mut best_lambda = lambdas[0];
        let mut best_err = f64::INFINITY;
        for &l in &lambdas {
            let gamma = solve(&k_zz, n as f64 * l, &k_z_tilde);
            let cross = (gamma.transpose() * &k_x_tilde_ref).diagonal().sum();
            let quad = (gamma.transpose() * &k_xx_ref * &gamma).diagonal().sum();
            let err = m as f64 - 2.0 * cross + quad;
            println!("  lambda {l:9.2e}: stage1 err {err:10.3}");
            if err < best_err {
                best_err = err;
                best_lambda = l;
            }
        }
        println!("  -> best lambda {best_lambda:.2e}");
        let gamma = solve(&k_zz, n as f64 * best_lambda, &k_z_tilde);
        let gamma_1 = solve(&k_zz, n as f64 * best_lambda, &k_zz);
        let y2_mean = y2.sum() / m as f64;
        let y2c = DVector::from_fn(m, |i, _| y2[i] - y2_mean);

        for fxf in [1.0f64, 8.0, 32.0] {
            let bw_x = bw_x_med * fxf;
            let k_xx = gk(&x1, &x1, bw_x);
            let k_new = gk(&xs_ilr, &x1, bw_x);
            let w = &k_xx * &gamma;
            let wwt = &w * w.transpose();
            let wy = &w * &y2c;
            println!("  fx={fxf}:");
            let xis: Vec<f64> = (0..10)
                .map(|i| (1e-6f64.ln() + (0.0 - 1e-6f64.ln()) * i as f64 / 9.0).exp())
                .collect();
            for &xi in &xis {
                let lhs = &wwt + m as f64 * xi * &k_xx;
                let alpha_m = solve(&lhs, 0.0, &DMatrix::from_column_slice(n, 1, wy.as_slice()));
                let alpha = DVector::from_column_slice(alpha_m.as_slice());
                let pred1 = gamma_1.transpose() * (&k_xx * &alpha);
                let v: f64 = (0..n)
                    .map(|i| {
                        let e = y1[i] - (y2_mean + pred1[i]);
                        e * e
                    })
                    .sum::<f64>()
                    / n as f64;
                let preds = &k_new * &alpha;
                let oos: f64 = (0..xs.len())
                    .map(|i| {
                        let e = (y2_mean + preds[i]) - fx_t[i];
                        e * e
                    })
                    .sum::<f64>()
                    / xs.len() as f64;
                println!("    xi {xi:9.2e}: causal-val {v:10.4}  oos {oos:10.4}");
            }
        }
    }
}
