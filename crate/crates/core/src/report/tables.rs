use crate::cohort::{summarize, Column};
use crate::pipeline::write_associations;
use crate::stats::AdjustedResultSet;

use super::CohortView;

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".into(), |x| x.to_string())
}

/// Mean and SD of age and every fundus feature by sex and overall, one row per variable.
pub fn summary_table1(cohort: &CohortView) -> String {
    let mut columns = vec![Column {
        name: "age".into(),
        values: cohort.age.clone(),
    }];
    columns.extend(cohort.fundus.iter().cloned());
    let stats = summarize(&columns, &cohort.sex);
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = [
        "variable",
        "male_n",
        "male_mean",
        "male_sd",
        "female_n",
        "female_mean",
        "female_sd",
        "all_n",
        "all_mean",
        "all_sd",
    ];
    w.write_record(header).expect("in-memory write");
    for (col, chunk) in columns.iter().zip(stats.chunks(3)) {
        let mut rec = vec![col.name.clone()];
        for s in chunk {
            rec.extend([s.n.to_string(), opt(s.mean), opt(s.sd)]);
        }
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// The association export reordered by adjusted p, then |r| descending, then names.
pub fn associations_table(set: &AdjustedResultSet) -> String {
    let mut order: Vec<usize> = (0..set.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (&set.results[a], &set.results[b]);
        set.p_adjusted[a]
            .total_cmp(&set.p_adjusted[b])
            .then(rb.r.abs().total_cmp(&ra.r.abs()))
            .then_with(|| ra.x_name.cmp(&rb.x_name))
            .then_with(|| ra.y_name.cmp(&rb.y_name))
    });
    let sorted = AdjustedResultSet {
        results: order.iter().map(|&i| set.results[i].clone()).collect(),
        p_adjusted: order.iter().map(|&i| set.p_adjusted[i]).collect(),
        significant: order.iter().map(|&i| set.significant[i]).collect(),
        q: set.q,
        scope: set.scope,
    };
    let mut buf = Vec::new();
    write_associations(&sorted, &mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("utf-8")
}
