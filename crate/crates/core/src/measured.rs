//! Accuracy measurements of the physical launcher, used as regression
//! anchors. Standard deviations are in meters, areas in square meters.

use serde::Serialize;

/// One measured series of a parameter sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasuredRow {
    /// Swept setting; `None` for continuous motor operation.
    pub setting: Option<f64>,
    pub n: usize,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub area_sigma: f64,
    /// Actuation-to-launch time (s), stroke gain sweep only.
    pub launch_time: Option<f64>,
}

const fn row(setting: f64, n: usize, sigma_x: f64, sigma_y: f64, area_sigma: f64) -> MeasuredRow {
    MeasuredRow {
        setting: Some(setting),
        n,
        sigma_x,
        sigma_y,
        area_sigma,
        launch_time: None,
    }
}

const fn timed(
    setting: f64,
    n: usize,
    sigma_x: f64,
    sigma_y: f64,
    area_sigma: f64,
    launch_time: f64,
) -> MeasuredRow {
    MeasuredRow {
        launch_time: Some(launch_time),
        ..row(setting, n, sigma_x, sigma_y, area_sigma)
    }
}

/// Ramp-up time (s) sweep.
pub const RAMP_UP: [MeasuredRow; 9] = [
    row(0.01, 39, 0.0402, 0.0166, 0.002096),
    row(0.05, 32, 0.0400, 0.0143, 0.001797),
    row(0.10, 38, 0.0436, 0.0174, 0.002383),
    row(0.50, 34, 0.0211, 0.0150, 0.000994),
    row(1.00, 34, 0.0243, 0.0172, 0.001313),
    row(2.00, 33, 0.0243, 0.0134, 0.001023),
    row(3.00, 36, 0.0234, 0.0134, 0.000985),
    row(8.00, 40, 0.0247, 0.0173, 0.001342),
    MeasuredRow {
        setting: None,
        n: 40,
        sigma_x: 0.0231,
        sigma_y: 0.0150,
        area_sigma: 0.001089,
        launch_time: None,
    },
];

/// Stroke gain sweep with actuation-to-launch times.
pub const STROKE_GAIN: [MeasuredRow; 8] = [
    timed(0.05, 35, 0.0197, 0.0143, 0.00088, 8.83),
    timed(0.10, 50, 0.0156, 0.0192, 0.00095, 4.21),
    timed(0.50, 50, 0.0241, 0.0239, 0.00181, 1.60),
    timed(1.00, 49, 0.0213, 0.0223, 0.00149, 1.39),
    timed(3.00, 46, 0.0237, 0.0196, 0.00146, 0.81),
    timed(5.00, 50, 0.0227, 0.0223, 0.00159, 0.61),
    timed(10.00, 50, 0.0199, 0.0215, 0.00134, 0.67),
    timed(30.00, 50, 0.0279, 0.0150, 0.00132, 0.62),
];

/// Pinching diameter (mm) sweep.
pub const PINCHING: [MeasuredRow; 6] = [
    row(35.3, 51, 0.03194, 0.03062, 0.00307),
    row(35.8, 48, 0.01932, 0.02658, 0.00161),
    row(36.4, 49, 0.01906, 0.02171, 0.00130),
    row(37.0, 49, 0.01965, 0.02480, 0.00153),
    row(37.4, 49, 0.01866, 0.02208, 0.00129),
    row(38.6, 49, 0.02361, 0.02428, 0.00180),
];

/// Orientation jump A/B series: (jump, n, σx, σy).
pub const ORIENTATION_JUMP: [(bool, usize, f64, f64); 2] =
    [(false, 20, 0.0155, 0.0193), (true, 20, 0.0195, 0.0176)];

/// Plotted deviations (mm): (setting, σx, σy, σ_avg).
pub type FigurePoint = (f64, f64, f64, f64);

pub const FIGURE_RAMP_UP: [FigurePoint; 8] = [
    (0.01, 40.1689226222973, 16.5665564742826, 28.36773954829),
    (0.05, 40.0360561215795, 14.3320032042472, 27.1840296629134),
    (0.1, 43.5996082078906, 17.4283277285046, 30.5139679681976),
    (0.5, 21.1268140636482, 15.0007166933308, 18.0637653784895),
    (1.0, 24.2869301473277, 17.1740209751143, 20.730475561221),
    (2.0, 24.3445778226545, 13.4113465678336, 18.8779621952441),
    (3.0, 23.4409623199056, 13.3503104916539, 18.3956364057798),
    (8.0, 23.7327250540187, 17.2763155274512, 20.504520290735),
];

/// Continuous-operation reference line of the ramp-up plot (mm).
pub const FIGURE_RAMP_UP_CONTINUOUS: (f64, f64, f64) =
    (23.1068482921517, 15.0455328140189, 19.0761905530853);

pub const FIGURE_STROKE_GAIN: [FigurePoint; 8] = [
    (0.05, 19.6968471252269, 14.2923178990428, 16.9945825121348),
    (0.1, 15.6307345068363, 19.2354820838708, 17.4331082953535),
    (0.5, 24.0627585301564, 23.906328791735, 23.9845436609457),
    (1.0, 21.2650801017897, 22.2961313151983, 21.780605708494),
    (3.0, 23.661425842816, 19.6001743191984, 21.6308000810072),
    (5.0, 22.6517158350676, 22.3218273192108, 22.4867715771392),
    (10.0, 19.8677397324046, 21.5241350461301, 20.6959373892673),
    (30.0, 27.9296133873545, 14.9931277190834, 21.461370553219),
];

pub const FIGURE_PINCHING: [FigurePoint; 6] = [
    (35.3, 16.0566045415551, 27.4695808719725, 21.7630927067638),
    (35.8, 20.2740263366794, 26.4265727361768, 23.3502995364281),
    (36.4, 19.0314113856567, 21.4700468292318, 20.2507291074442),
    (37.0, 19.6486109356218, 24.8010675187072, 22.2248392271645),
    (37.4, 18.9861585942862, 22.2645586213726, 20.6253586078294),
    (38.6, 23.6136857453632, 24.2818106138511, 23.9477481796071),
];

/// Maximum ball speed (m/s) and topspin (rev/s) of the MN5008 launcher.
pub const MAX_SPEED_MN5008: f64 = 15.4;
pub const MAX_TOPSPIN_MN5008: f64 = 192.0;
/// Maximum ball speed (m/s) of the MN4004 launcher.
pub const MAX_SPEED_MN4004: f64 = 10.8;

/// Trajectory counts per control regime of the recorded data set.
pub const DATASET_GROUPS: [usize; 6] = [415, 64, 364, 1103, 1385, 430];
/// Recorded trajectories with a landing point on the table.
pub const DATASET_ON_TABLE: usize = 3250;
