//! Load a bundled augmentation policy, strip its rotation strategy, and
//! apply it to an image with synchronized box updates.
//!
//! Run with: `cargo run --example augment_policy`

use roadtk::augment::{apply_policy, preprocess, strip_rotation, AugPolicy, ImageBuffer};
use roadtk::dataset::GroundTruthBox;
use roadtk::{BoundingBox, ClassLabel};

fn main() -> roadtk::Result<()> {
    // a synthetic "road" image: gray with a dark diagonal streak
    let mut image = ImageBuffer::new(160, 120)?;
    for y in 0..120 {
        for x in 0..160 {
            let on_crack = (x as i32 - y as i32).unsigned_abs() < 4;
            let level = if on_crack { 40 } else { 128 };
            image.set_pixel(x, y, [level, level, level]);
        }
    }
    let boxes = vec![GroundTruthBox {
        bbox: BoundingBox::new(10.0, 8.0, 120.0, 110.0)?,
        label: ClassLabel::D00,
    }];

    let policy = AugPolicy::builtin("v1").expect("bundled policy");
    println!(
        "policy {:?}: {} sub-policies, contains rotation: {}",
        policy.name,
        policy.sub_policies.len(),
        policy.contains_rotation()
    );

    // rotation would turn a longitudinal crack into a transverse one, so it
    // is eliminated rather than applied
    let stripped = strip_rotation(&policy);
    println!(
        "after strip_rotation: rotation_free = {}",
        stripped.rotation_free
    );

    for seed in [0u64, 4, 5, 7] {
        let applied = apply_policy(&image, &boxes, &stripped, seed)?;
        let b = applied.boxes.first();
        println!(
            "seed {seed}: sub-policy {} -> image {}x{}, {} boxes{}",
            applied.chosen_sub_policy,
            applied.image.width(),
            applied.image.height(),
            applied.boxes.len(),
            b.map(|gt| format!(
                ", first box [{:.1}, {:.1}, {:.1}, {:.1}]",
                gt.bbox.xmin(),
                gt.bbox.ymin(),
                gt.bbox.xmax(),
                gt.bbox.ymax()
            ))
            .unwrap_or_default()
        );
    }

    // the training-time preprocessing step: seeded flip + resize + recorded
    // normalization parameters
    let pre = preprocess(&image, &boxes, 96, 0.5, 7)?;
    println!(
        "\npreprocess: flipped {}, output {}x{}, normalization mean {:?}",
        pre.flipped,
        pre.image.width(),
        pre.image.height(),
        pre.normalization.mean
    );
    Ok(())
}
