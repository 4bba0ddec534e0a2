//! Imitation training with validation rollouts, then a checkpoint round trip.

use mpvin::planner::{MpVin, PlannerConfig, PolicyModel, Variant};
use mpvin::symmetry::GroupSpec;
use mpvin::training::{train_with, Checkpoint, TrainConfig};
use mpvin::worlds::{generate_dataset, GraphWorldParams, Split, WorldParams};

fn main() -> mpvin::Result<()> {
    let world = WorldParams::Graph(GraphWorldParams::with_nodes(64));
    let train = generate_dataset(world, Split::Train, 64, 0)?;
    let val = generate_dataset(world, Split::Val, 16, 0)?;

    let mut model = MpVin::new(PlannerConfig::graph(Variant::R2Group, Some(GroupSpec::dihedral(4))), 0)?;
    let config = TrainConfig { batch_size: 8, ..TrainConfig::new(5, 0) };
    let out = train_with(&mut model, &train, &val, &config, |m| {
        println!(
            "epoch {}: loss {:.4}, val accuracy {:.3}, val success {:.1}%",
            m.epoch,
            m.train_loss,
            m.val_accuracy.unwrap_or(f64::NAN),
            m.val_success.unwrap_or(f64::NAN)
        )
    })?;
    println!("kept epoch {}", out.checkpoint.epoch);

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("checkpoint.json");
    out.checkpoint.save(&path)?;
    let restored = Checkpoint::load(&path)?.restore()?;
    let same = restored.params().iter().zip(model.params().iter()).all(|(a, b)| a.1 == b.1);
    println!("restored {} with identical parameters: {same}", restored.name());
    print!("{}", out.log.to_csv());
    Ok(())
}
