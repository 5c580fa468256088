//! On-disk dataset bundle: evaluation trips, history trips and stations.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use crate::ingest::{read_stations, read_trips, write_stations, write_trips, IngestError, ParseReport, TripRecord};
use crate::types::ChargingStation;

pub const TRIPS_FILE: &str = "trips.csv";
pub const HISTORY_FILE: &str = "history.csv";
pub const STATIONS_FILE: &str = "stations.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    pub trips: Vec<TripRecord>,
    pub history: Vec<TripRecord>,
    pub stations: Vec<ChargingStation>,
}

fn create(path: &Path) -> Result<BufWriter<File>, IngestError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| IngestError::Open { path: path.display().to_string(), source })
}

fn open(path: &Path) -> Result<File, IngestError> {
    File::open(path).map_err(|source| IngestError::Open { path: path.display().to_string(), source })
}

impl Bundle {
    pub fn write(&self, dir: &Path) -> Result<(), IngestError> {
        std::fs::create_dir_all(dir).map_err(|source| IngestError::Open { path: dir.display().to_string(), source })?;
        write_trips(create(&dir.join(TRIPS_FILE))?, &self.trips)?;
        write_trips(create(&dir.join(HISTORY_FILE))?, &self.history)?;
        write_stations(create(&dir.join(STATIONS_FILE))?, &self.stations)?;
        Ok(())
    }

    /// Reads a bundle; the reports cover trips, history and stations in
    /// that order.
    pub fn read(dir: &Path) -> Result<(Self, [ParseReport; 3]), IngestError> {
        let (trips, r1) = read_trips(open(&dir.join(TRIPS_FILE))?, None)?;
        let (history, r2) = read_trips(open(&dir.join(HISTORY_FILE))?, None)?;
        let (stations, r3) = read_stations(open(&dir.join(STATIONS_FILE))?)?;
        Ok((Self { trips, history, stations }, [r1, r2, r3]))
    }
}
