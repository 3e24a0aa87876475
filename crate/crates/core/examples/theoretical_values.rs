//! Reference risk-measure values for the two severity laws used in the
//! simulation designs, over the default grid of risk-aversion levels.

use srm_ltrc::severity::{ground_up_srm, window_srm, SeverityModel, WindowScheme};
use srm_ltrc::spectrum::{Spectrum, DEFAULT_K_GRID};

fn main() -> srm_ltrc::Result<()> {
    let models = [
        ("shifted exponential", SeverityModel::shifted_exponential(1000.0, 1000.0)?),
        ("Pareto I", SeverityModel::pareto(1000.0, 2.0)?),
    ];
    let window = WindowScheme::fixed(4000.0, 14000.0)?;
    for (name, model) in &models {
        println!("{name}");
        println!("{:>6} {:>14} {:>14}", "k", "ground-up", "in window");
        for &k in &DEFAULT_K_GRID {
            let s = Spectrum::exponential(k)?;
            println!("{k:>6} {:>14.2} {:>14.2}", ground_up_srm(model, &s)?, window_srm(model, &window, &s)?);
        }
    }
    Ok(())
}
