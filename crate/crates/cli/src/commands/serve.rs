use gpsurr_service::ServeConfig;

use crate::args::ServeArgs;
use crate::error::{CliError, Result};

pub fn config(args: &ServeArgs) -> Result<ServeConfig> {
    if !args.models_dir.is_dir() {
        return Err(CliError::Usage(format!(
            "--models-dir {}: no such directory",
            args.models_dir.display()
        )));
    }
    Ok(ServeConfig {
        models_dir: args.models_dir.clone(),
        host: args.host.clone(),
        port: args.port,
        cors_origin: args.cors_origin.clone(),
    })
}

/// Runs the HTTP service until Ctrl-C.
pub fn run(args: &ServeArgs) -> Result<()> {
    let cfg = config(args)?;
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::Data(format!("cannot start runtime: {e}")))?;
    rt.block_on(gpsurr_service::serve(cfg))?;
    Ok(())
}
