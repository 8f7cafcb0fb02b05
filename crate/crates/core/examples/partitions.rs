//! Input-space partitions: ReLU neurons cut the plane into regions, trees
//! into boxes, and small tanh networks into smooth decision boundaries.

use deepbayes::experiments::{relu_partition, tangent_fan, tree_vs_network};
use deepbayes::geom::{count_regions, DatasetKind, RegionMethod};

fn main() -> deepbayes::Result<()> {
    for n in 1..=6 {
        let fan = tangent_fan(n)?;
        println!(
            "{n} lines in general position: {} regions (grid {})",
            count_regions(&fan, RegionMethod::Oracle)?,
            count_regions(&fan, RegionMethod::Grid)?
        );
    }
    let r = relu_partition(3, 7, 100)?;
    println!("3 random ReLU neurons: region_count = {}", r.region_count);

    for kind in DatasetKind::ALL {
        let t = tree_vs_network(kind, 200, 0.1, 0, 4, 300, 40)?;
        println!(
            "{:7} tree accuracy {:.3} ({} leaves), network accuracy {:.3}",
            kind.name(),
            t.tree_accuracy,
            t.tree_leaves,
            t.network_accuracy
        );
    }
    Ok(())
}
