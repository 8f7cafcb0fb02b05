//! Closed-form identities that let small networks represent products and maxima.

use deepbayes::experiments::identity_sweep;
use deepbayes::identities::{verify_identity, IdentityKind};

fn main() -> deepbayes::Result<()> {
    for kind in IdentityKind::ALL {
        let x: &[f64] = if kind == IdentityKind::MaxSum { &[1.5, -2.0, 0.7, 3.0] } else { &[1.5, -2.0] };
        let s = verify_identity(kind, x)?;
        println!("{:16} {x:?}: gap {:.2e}", kind.name(), s.relative_gap());
    }
    println!();
    for row in identity_sweep(10_000, 1)? {
        println!("{:16} max relative gap {:.2e} over {} random inputs", row.identity, row.max_gap, row.samples);
    }
    Ok(())
}
