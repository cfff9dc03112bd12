//! Tail equivalence of eventually periodic sequences.

use sepcoset_lab::cber::{tail_equivalent, EvPeriodicSeq};

fn main() -> sepcoset_lab::Result<()> {
    let pairs = [
        ("pre=[2,3];per=[0,1]", "per=[1,0]"),
        ("pre=[5];per=[0,0,1]", "pre=[7,7];per=[0,1,0]"),
        ("per=[0,1]", "per=[0,0,1]"),
    ];
    for (a, b) in pairs {
        let w0: EvPeriodicSeq = a.parse()?;
        let w1: EvPeriodicSeq = b.parse()?;
        match tail_equivalent(&w0, &w1) {
            Some((n, m)) => println!("{w0} ~ {w1}: drop {n} and {m} tokens"),
            None => println!("{w0} and {w1} have different tails"),
        }
    }
    Ok(())
}
