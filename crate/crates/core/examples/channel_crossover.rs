//! RF, FSO and hybrid rates against distance, and where the curves cross.

use ntn_marl::channel::{find_crossovers, fso_rate, hybrid_rate, rf_rate, ChannelParams, ChannelSettings};

fn main() -> ntn_marl::Result<()> {
    for gamma0 in [1e9, 1e10] {
        let p = ChannelParams::new(&ChannelSettings { gamma0, ..ChannelSettings::default() })?;
        println!("gamma0 = {gamma0:.0e}  (k1 = {:.3}, k2 = {:.3e} 1/m)", p.k1, p.k2);
        println!("{:>12} {:>14} {:>14} {:>14} {:>5}", "d [km]", "RF [Mbps]", "FSO [Mbps]", "hybrid [Mbps]", "link");
        for km in [1.0, 10.0, 50.0, 100.0, 200.0, 500.0, 1000.0, 2400.0, 6000.0] {
            let d = km * 1e3;
            let (h, kind) = hybrid_rate(d, &p)?;
            println!(
                "{km:>12.0} {:>14.4} {:>14.4} {:>14.4} {:>5}",
                rf_rate(d, &p)? / 1e6,
                fso_rate(d, &p)? / 1e6,
                h / 1e6,
                kind.as_str()
            );
        }
        for c in find_crossovers(&p, 1.0, 6e6, 20_000)? {
            println!("crossing at {:.3} km, {} better below", c.distance / 1e3, c.better_below.as_str());
        }
        println!();
    }
    Ok(())
}
