//! Ranking metrics: DCG for one relevant item, NDCG over a set of users,
//! top-k accuracy, and the uniform-random baseline.

use deepbayes::data::{dcg_at_k, ndcg, ndcg_by_class, rank_labels, topk_accuracy, uniform_random_ndcg};

fn main() -> deepbayes::Result<()> {
    println!("DCG, truth first:  {:.4}", dcg_at_k("FR", &["FR", "US", "DE", "NDF", "IT"], 5)?);
    println!("DCG, truth second: {:.4}", dcg_at_k("FR", &["US", "FR", "DE", "NDF", "IT"], 5)?);
    println!("DCG, truth absent: {:.4}", dcg_at_k("FR", &["US", "DE", "NDF", "IT", "GB"], 5)?);

    let labels: Vec<String> = ["NDF", "US", "FR", "other"].iter().map(|s| s.to_string()).collect();
    let scores = [[0.6, 0.3, 0.05, 0.05], [0.2, 0.5, 0.2, 0.1], [0.5, 0.1, 0.3, 0.1]];
    let truth: Vec<String> = ["NDF", "US", "FR"].iter().map(|s| s.to_string()).collect();
    let ranked: Vec<Vec<String>> = scores.iter().map(|s| rank_labels(&labels, s, 3)).collect();
    for (t, r) in truth.iter().zip(&ranked) {
        println!("truth {t:5} ranked {r:?}");
    }
    println!("NDCG@3 = {:.4}", ndcg(&truth, &ranked, 3)?);
    for (class, count, value) in ndcg_by_class(&truth, &ranked, 3)? {
        println!("  {class:5} n = {count} NDCG = {value:.4}");
    }
    for k in 1..=2 {
        println!("top-{k} accuracy = {:.3}", topk_accuracy(&truth, &ranked, k)?.overall);
    }
    println!("random ranker over 12 classes, k = 5: {:.4}", uniform_random_ndcg(12, 5));
    Ok(())
}
