use crate::cloud::ClassCatalog;

use super::metrics::ConfusionMatrix;
use super::sweep::SweepRow;
use super::trials::TrialStats;

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".to_string(), |v| format!("{v:.6}"))
}

/// `class_id,class_name,tp,fp,fn,f1,iou` per class, then a `mean` row.
pub fn metrics_csv(cm: &ConfusionMatrix, catalog: &ClassCatalog) -> String {
    let mut s = String::from("class_id,class_name,tp,fp,fn,f1,iou\n");
    let iou = cm.iou_per_class();
    let f1 = cm.f1_per_class();
    for (k, &id) in cm.classes().iter().enumerate() {
        let (tp, fp, fn_) = cm.tp_fp_fn(k);
        s += &format!(
            "{id},{},{tp},{fp},{fn_},{},{}\n",
            catalog.name(id).unwrap_or(""),
            fmt_opt(f1[k]),
            fmt_opt(iou[k])
        );
    }
    s += &format!("mean,,,,,,{}\n", fmt_opt(cm.mean_iou()));
    s
}

pub fn metrics_table(cm: &ConfusionMatrix, catalog: &ClassCatalog) -> String {
    let mut s = format!("{:<16} {:>10} {:>8} {:>8}\n", "class", "points", "F1", "IoU");
    let iou = cm.iou_per_class();
    let f1 = cm.f1_per_class();
    let pct = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{:.2}", v * 100.0));
    for (k, &id) in cm.classes().iter().enumerate() {
        let (tp, _, fn_) = cm.tp_fp_fn(k);
        let name = catalog.name(id).map_or_else(|| id.to_string(), str::to_string);
        s += &format!("{name:<16} {:>10} {:>8} {:>8}\n", tp + fn_, pct(f1[k]), pct(iou[k]));
    }
    s += &format!("{:<16} {:>10} {:>8} {:>8}\n", "mean", cm.total(), "", pct(cm.mean_iou()));
    s
}

/// `class_id,class_name,mean_iou,std_iou,defined` per class, then `mean`.
pub fn trials_csv(stats: &TrialStats, catalog: &ClassCatalog) -> String {
    let mut s = String::from("class_id,class_name,mean_iou,std_iou,defined\n");
    for c in &stats.classes {
        s += &format!(
            "{},{},{:.6},{:.6},{}\n",
            c.class,
            catalog.name(c.class).unwrap_or(""),
            c.mean,
            c.std,
            c.defined
        );
    }
    s += &format!("mean,,{:.6},{:.6},{}\n", stats.mean_iou, stats.mean_iou_std, stats.trials);
    s
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("rho,mean_iou,points_per_second\n");
    for r in rows {
        s += &format!("{},{:.6},{:.1}\n", r.rho, r.mean_iou, r.points_per_second);
    }
    s
}

/// Whitespace-separated columns with a `#` header, for gnuplot and friends.
pub fn sweep_plot_data(rows: &[SweepRow]) -> String {
    let mut s = String::from("# rho mean_iou points_per_second\n");
    for r in rows {
        s += &format!("{} {:.6} {:.1}\n", r.rho, r.mean_iou, r.points_per_second);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::super::metrics::confusion;
    use super::*;

    #[test]
    fn csv_layout() {
        let cat = ClassCatalog::parse("1:ground,2:car", 0).unwrap();
        let cm = confusion(&[1, 1, 2], &[1, 2, 2], &cat).unwrap();
        let csv = metrics_csv(&cm, &cat);
        assert_eq!(
            csv,
            "class_id,class_name,tp,fp,fn,f1,iou\n\
             1,ground,1,0,1,0.666667,0.500000\n\
             2,car,1,1,0,0.666667,0.500000\n\
             mean,,,,,,0.500000\n"
        );
        assert!(metrics_table(&cm, &cat).contains("ground"));
    }
}
