use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    Noise,
    Cluster(usize),
}

/// Density-based clustering. Points are scanned in input order and clusters
/// are numbered in order of their first core point, so the labelling is a
/// pure function of the input. A point counts itself as a neighbour.
pub fn dbscan(points: &[(f64, f64)], eps: f64, min_pts: usize) -> Vec<Label> {
    let n = points.len();
    let eps2 = eps * eps;
    let neighbours = |i: usize| -> Vec<usize> {
        (0..n)
            .filter(|&j| {
                let dx = points[i].0 - points[j].0;
                let dy = points[i].1 - points[j].1;
                dx * dx + dy * dy <= eps2
            })
            .collect()
    };
    let mut labels: Vec<Option<Label>> = vec![None; n];
    let mut next = 0;
    for i in 0..n {
        if labels[i].is_some() {
            continue;
        }
        let seeds = neighbours(i);
        if seeds.len() < min_pts {
            labels[i] = Some(Label::Noise);
            continue;
        }
        let id = next;
        next += 1;
        labels[i] = Some(Label::Cluster(id));
        let mut queue = std::collections::VecDeque::from(seeds);
        while let Some(j) = queue.pop_front() {
            match labels[j] {
                Some(Label::Cluster(_)) => continue,
                Some(Label::Noise) => {
                    // Border point: joins the cluster but does not expand it.
                    labels[j] = Some(Label::Cluster(id));
                    continue;
                }
                None => {}
            }
            labels[j] = Some(Label::Cluster(id));
            let more = neighbours(j);
            if more.len() >= min_pts {
                queue.extend(more);
            }
        }
    }
    labels.into_iter().map(|l| l.expect("every point labelled")).collect()
}
