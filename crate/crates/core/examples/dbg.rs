use springerlab_core::lattice::PRUNE_CALLS;
use springerlab_core::matrix::Matrix;
use springerlab_core::oracle::*;
use springerlab_core::padic::LocalField;
use std::io::Write;
use std::time::Instant;

fn main() {
    let f = LocalField::qp(3);
    let g = Matrix::from_rows(
        &f,
        vec![
            vec![f.one(40), f.zero(40)],
            vec![f.zero(40), f.from_i64(4, 40)],
        ],
    );
    for m in 1..=4 {
        let t0 = Instant::now();
        let (ring, gm) = win_matrix(&g, m, 6).unwrap();
        PRUNE_CALLS.store(0, std::sync::atomic::Ordering::Relaxed);
        let c = springerlab_core::lattice::count_fiber(&ring, &gm, &Default::default()).unwrap();
        println!(
            "m={m}: count {c} in {:?} calls {}",
            t0.elapsed(),
            PRUNE_CALLS.load(std::sync::atomic::Ordering::Relaxed)
        );
        std::io::stdout().flush().unwrap();
    }
}
