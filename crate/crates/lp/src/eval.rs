//! Direct evaluation of a price table: α_i is the smallest of the three bound
//! families, with h computed pointwise.

use serde::Serialize;

use ranking_core::gain::{big_h_value, PriceTable};
use ranking_core::oracles::ClassLabel;

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum BoundFamily {
    Unmatched,
    NoBackup { c: u32 },
    WithBackup { c: u32, d: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BucketBound {
    pub x_u: u32,
    pub alpha_i: f64,
    pub binding: BoundFamily,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Evaluation {
    pub k: u32,
    pub alpha: f64,
    pub buckets: Vec<BucketBound>,
}

impl Evaluation {
    pub fn alpha_i(&self) -> Vec<f64> {
        self.buckets.iter().map(|b| b.alpha_i).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("evaluation serializes")
    }
}

pub fn evaluate_price_table(f: &PriceTable) -> Result<Evaluation> {
    f.validate()?;
    let k = f.k();
    let mut buckets = Vec::with_capacity(k as usize);
    for x_u in 1..=k {
        let h_s: Vec<f64> = (1..=k)
            .map(|x_v| big_h_value(ClassLabel::NoBackup, f, x_u, Some(x_v), None))
            .collect::<std::result::Result<_, _>>()?;
        let mut best = (
            big_h_value(ClassLabel::Unmatched, f, x_u, None, None)?,
            BoundFamily::Unmatched,
        );
        let mut consider = |value: f64, family| {
            if value < best.0 {
                best = (value, family);
            }
        };
        for c in 1..=k {
            let tail = &h_s[c as usize - 1..];
            consider(tail.iter().sum::<f64>() / tail.len() as f64, BoundFamily::NoBackup { c });
        }
        for d in 1..=k {
            let h_b: Vec<f64> = (1..=d)
                .map(|x_v| big_h_value(ClassLabel::WithBackup, f, x_u, Some(x_v), Some(d + 1)))
                .collect::<std::result::Result<_, _>>()?;
            for c in 1..=d {
                let span = &h_b[c as usize - 1..];
                consider(
                    span.iter().sum::<f64>() / span.len() as f64,
                    BoundFamily::WithBackup { c, d },
                );
            }
        }
        buckets.push(BucketBound {
            x_u,
            alpha_i: best.0,
            binding: best.1,
        });
    }
    let alpha = buckets.iter().map(|b| b.alpha_i).sum::<f64>() / k as f64;
    Ok(Evaluation { k, alpha, buckets })
}
