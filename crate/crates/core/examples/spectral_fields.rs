//! Random divergence-free fields, norms, Leray projection and snapshot I/O.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sdns::spectral::random::{random_field, FieldSpectrum};
use sdns::spectral::snapshot::{read_snapshot, write_snapshot};
use sdns::spectral::{grad_l2_norm, leray_project, lp_norm, sobolev_norm, Grid};

fn main() -> sdns::Result<()> {
    let grid = Grid::periodic(3, 16)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let v = random_field(&grid, &mut rng, &FieldSpectrum::default());
    println!("grid {grid}");
    println!("|v|_H      = {:.6}", sobolev_norm(0.0, &v));
    println!("|v|_H1     = {:.6}", sobolev_norm(1.0, &v));
    println!("|grad v|   = {:.6}", grad_l2_norm(&v));
    println!("|v|_L4     = {:.6}", lp_norm(4.0, &v)?);
    println!("|v|_H^-1/2 = {:.6}", sobolev_norm(-0.5, &v));
    println!("divergence-free: {}", v.is_divergence_free());
    let p = leray_project(&v);
    println!("projection moves it by {:.2e}", (&p - &v).max_abs());

    let mut bytes = Vec::new();
    write_snapshot(&mut bytes, 0.5, &v)?;
    let (t, back) = read_snapshot(bytes.as_slice())?;
    println!("snapshot: {} bytes, t={t}, identical: {}", bytes.len(), back == v);
    Ok(())
}
