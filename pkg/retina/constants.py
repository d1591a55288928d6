SCHEMA_VERSION = "cad-features/1"
MODEL_FORMAT_VERSION = 1

LABELS = ("normal", "glaucoma")
POSITIVE_LABEL = "glaucoma"

STAGES = ("raw", "preprocessed", "enhanced")

FOS_NAMES = ["Mean", "SD", "Entropy", "Variance", "Smoothness", "Kurtosis", "Skewness"]
GLCM_NAMES = ["IDM", "Contrast", "Energy", "Homogeneity"]
HOC_ANGLES = (10, 50, 90, 130, 180)
HOC_NAMES = [f"HOC_{angle}" for angle in HOC_ANGLES]
HOS_NAMES = ["Entropy_HoS", "Mean_HoS", "Ent_dg1", "Ent_dg2", "Ent_dg3"]
LGS_NAMES = [
    "Mean_LGS", "Variance_LGS", "Skewness_LGS", "Kurtosis_LGS", "Energy_LGS", "Entropy_LGS",
]
GSP_DIRECTIONS = (0, 45, 90, 135)
GSP_STATS = ["Kurtosis", "Skewness", "SD", "Q25", "Q50", "Q75", "Q100"]
GSP_NAMES = [f"GSP{direction}_{stat}" for direction in GSP_DIRECTIONS for stat in GSP_STATS]

# Frozen column order of every feature record
FEATURE_NAMES = FOS_NAMES + GLCM_NAMES + HOC_NAMES + HOS_NAMES + LGS_NAMES + GSP_NAMES
FEATURE_COUNT = len(FEATURE_NAMES)

MOTHER_WAVELETS = ("MexicanHat", "Morlet", "Gaussian", "Meyer", "GGW", "Shannon", "Haar")

# (hidden units, batch size) cells of the experiment grid
PRESET_GRID = ((5, 113), (10, 56), (15, 37), (24, 23))
EPOCH_CHECKPOINTS = (10, 50, 100, 150, 200)
SWEEP_HIDDEN_UNITS = 10
SWEEP_EPOCHS = 50

SPLIT_FRACTIONS = (0.60, 0.15, 0.25)  # train, validation, test
