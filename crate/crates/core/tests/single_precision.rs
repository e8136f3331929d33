use tenfill_core::{
    csvd_qr, evaluate, solve_tlnm, solve_tlnmtv, Mask, Mat32, Observation, Tensor32, TlnmConfig,
    TlnmTvConfig,
};

fn rank_one() -> Tensor32 {
    Tensor32::from_fn(&[8, 7, 6], |i| {
        (1.0 + 0.1 * i[0] as f32) * (0.5 + 0.05 * i[1] as f32) * (2.0 - 0.1 * i[2] as f32) / 4.0
    })
    .unwrap()
}

#[test]
fn tlnm_runs_in_f32() {
    let gt = rank_one();
    let mask = Mask::new(
        gt.dims().to_vec(),
        (0..gt.len()).map(|k| k % 3 != 0).collect(),
    )
    .unwrap();
    let obs = Observation::sample(&gt, mask).unwrap();
    let mut cfg = TlnmConfig::<f32>::defaults(gt.dims());
    cfg.eps = 1e-4;
    let (x, report) = solve_tlnm(&obs, &cfg).unwrap();
    assert!(report.converged);
    let q = evaluate(&gt, &x, 3).unwrap();
    assert!(q.mpsnr > 40.0, "mpsnr {}", q.mpsnr);

    let tv = TlnmTvConfig::from_tlnm(cfg, 0.1, vec![true, true, false]);
    let (y, _) = solve_tlnmtv(&obs, &tv).unwrap();
    assert!(y.is_finite());
}

#[test]
fn csvd_in_f32() {
    let x = Mat32::from_fn(20, 15, |i, j| ((i + 1) * (j + 2)) as f32 / 100.0);
    let (f, _) = csvd_qr(&x, 1, 0.0, 10).unwrap();
    assert!(f.residual(&x).unwrap() <= 1e-5 * x.frobenius_norm());
    assert!(f.left.column_orthogonality_defect() <= 1e-5);
}
