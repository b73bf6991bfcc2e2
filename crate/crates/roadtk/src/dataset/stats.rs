//! Dataset distribution statistics.

use std::collections::BTreeMap;
use std::fmt;

use crate::dataset::{ClassLabel, DatasetSplit};
use crate::geometry::SizeBucket;

/// Image and box counts for one split, in the shape of the usual
/// distribution table: per-class box counts, the box total, and size-bucket
/// counts. `total_boxes` always equals the sum of the per-class counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatsTable {
    pub split_name: String,
    pub image_count: usize,
    pub class_counts: BTreeMap<ClassLabel, usize>,
    pub total_boxes: usize,
    pub small: usize,
    pub medium: usize,
    pub large: usize,
}

impl StatsTable {
    pub fn class_count(&self, label: ClassLabel) -> usize {
        self.class_counts.get(&label).copied().unwrap_or(0)
    }

    /// CSV form: one `class,count` row per class plus an `__images__,<n>` row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("class,count\n");
        for label in ClassLabel::ALL {
            out.push_str(&format!("{},{}\n", label, self.class_count(label)));
        }
        out.push_str(&format!("__images__,{}\n", self.image_count));
        out
    }
}

impl fmt::Display for StatsTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "split: {}", self.split_name)?;
        writeln!(f, "{:<10} {:>8}", "class", "boxes")?;
        for label in ClassLabel::ALL {
            writeln!(f, "{:<10} {:>8}", label.name(), self.class_count(label))?;
        }
        writeln!(f, "{:<10} {:>8}", "total", self.total_boxes)?;
        writeln!(f, "{:<10} {:>8}", "images", self.image_count)?;
        writeln!(
            f,
            "sizes      small {}  medium {}  large {}",
            self.small, self.medium, self.large
        )
    }
}

/// Count images and boxes in a split. Images contribute to `image_count`
/// whether or not they carry boxes; class columns count boxes only.
pub fn dataset_stats(split: &DatasetSplit) -> StatsTable {
    let mut class_counts: BTreeMap<ClassLabel, usize> =
        ClassLabel::ALL.iter().map(|&c| (c, 0)).collect();
    let (mut small, mut medium, mut large) = (0, 0, 0);
    let mut total = 0usize;
    for record in split.records() {
        for gt in &record.boxes {
            *class_counts
                .get_mut(&gt.label)
                .expect("all classes present") += 1;
            total += 1;
            match gt.bbox.size_bucket() {
                SizeBucket::Small => small += 1,
                SizeBucket::Medium => medium += 1,
                SizeBucket::Large => large += 1,
            }
        }
    }
    StatsTable {
        split_name: split.name.clone(),
        image_count: split.len(),
        class_counts,
        total_boxes: total,
        small,
        medium,
        large,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{GroundTruthBox, ImageRecord};
    use crate::geometry::BoundingBox;

    fn gt(label: ClassLabel, b: (f64, f64, f64, f64)) -> GroundTruthBox {
        GroundTruthBox {
            bbox: BoundingBox::new(b.0, b.1, b.2, b.3).unwrap(),
            label,
        }
    }

    fn two_image_split() -> DatasetSplit {
        let a = ImageRecord::new(
            "a",
            600,
            600,
            vec![gt(ClassLabel::D00, (0.0, 0.0, 10.0, 10.0))],
        )
        .unwrap();
        let b = ImageRecord::new(
            "b",
            600,
            600,
            vec![
                gt(ClassLabel::D00, (0.0, 0.0, 200.0, 200.0)),
                gt(ClassLabel::D40, (10.0, 10.0, 50.0, 50.0)),
            ],
        )
        .unwrap();
        DatasetSplit::new("train", vec![a, b]).unwrap()
    }

    #[test]
    fn counts_boxes_and_images() {
        let stats = dataset_stats(&two_image_split());
        assert_eq!(stats.image_count, 2);
        assert_eq!(stats.class_count(ClassLabel::D00), 2);
        assert_eq!(stats.class_count(ClassLabel::D40), 1);
        assert_eq!(stats.class_count(ClassLabel::D10), 0);
        assert_eq!(stats.total_boxes, 3);
        // 10x10 small, 40x40 medium, 200x200 large
        assert_eq!((stats.small, stats.medium, stats.large), (1, 1, 1));
        assert_eq!(
            stats.total_boxes,
            stats.class_counts.values().sum::<usize>()
        );
    }

    #[test]
    fn csv_shape() {
        let stats = dataset_stats(&two_image_split());
        assert_eq!(
            stats.to_csv(),
            "class,count\nD00,2\nD10,0\nD20,0\nD40,1\n__images__,2\n"
        );
    }

    #[test]
    fn stats_are_additive_over_disjoint_splits() {
        let split = two_image_split();
        let a = DatasetSplit::new("a", vec![split.records()[0].clone()]).unwrap();
        let b = DatasetSplit::new("b", vec![split.records()[1].clone()]).unwrap();
        let (sa, sb, sall) = (dataset_stats(&a), dataset_stats(&b), dataset_stats(&split));
        assert_eq!(sall.image_count, sa.image_count + sb.image_count);
        assert_eq!(sall.total_boxes, sa.total_boxes + sb.total_boxes);
        for label in ClassLabel::ALL {
            assert_eq!(
                sall.class_count(label),
                sa.class_count(label) + sb.class_count(label)
            );
        }
    }

    #[test]
    fn reserialization_is_stable() {
        let stats = dataset_stats(&two_image_split());
        assert_eq!(stats.to_csv(), dataset_stats(&two_image_split()).to_csv());
        assert_eq!(
            format!("{stats}"),
            format!("{}", dataset_stats(&two_image_split()))
        );
    }
}
