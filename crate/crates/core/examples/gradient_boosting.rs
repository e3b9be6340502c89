//! Logistic gradient boosting: training loss per stage, accuracy and
//! the importance summed over stage trees.

use reprtree::boost::{BoostConfig, BoostedEnsemble};
use reprtree::dataset::{generate_circles, split, SplitSpec};

fn main() -> reprtree::Result<()> {
    let data = generate_circles(400, 0.15, 0.5, 2)?;
    let (train, test) = split(&data, &SplitSpec::new(0.75, 2).stratified(true))?;

    let model = BoostedEnsemble::fit(&train, &BoostConfig::new(25, 3))?;
    for (stage, loss) in model.train_log_loss.iter().enumerate().step_by(5) {
        println!("after {stage:>2} stages: log-loss {loss:.5}");
    }
    println!("train accuracy {:.3}", model.accuracy(&train)?);
    println!("test accuracy  {:.3}", model.accuracy(&test)?);
    println!("importance {:?}", model.feature_importance().normalized);

    let x = test.point(0);
    println!("p(class 1 | {x:?}) = {:.3}", model.predict_proba(x)?);
    Ok(())
}
