# ========================================================= #
import enum

# ========================================================= #


# Synthetic data - datagen
class GeneratorKind(enum.Enum):
    """
    Instance families for function: ``svmcoreset.datagen.generate()`` and the ``gen`` command
    """

    BLOBS = "blobs"
    PATHOLOGICAL = "pathological"
    LOWER_BOUND = "lower_bound"


# Subset selection - coreset / streaming / bench
class SamplingMethod(enum.Enum):
    """
    How a weighted subset is drawn. ``CORESET`` is sensitivity based importance sampling, ``UNIFORM`` the baseline
    """

    UNIFORM = "uniform"
    CORESET = "coreset"


# Sweep modes - bench
class SweepMode(enum.Enum):
    """
    Whether the bench builds subsets from the whole data set at once or through merge-and-reduce
    """

    OFFLINE = "offline"
    STREAMING = "stream"


# Report formats - bench
class ReportFormat(enum.Enum):
    """
    Output formats for method: ``svmcoreset.bench.report()``
    """

    CSV = "csv"
    JSON = "json"


# Schedules for the tightened streaming parameters
class EstimateSchedule(enum.Enum):
    """
    ``FIXED`` uses the caller supplied size estimate, ``DOUBLING`` re-tightens as the stream grows past powers of 4
    """

    FIXED = "fixed"
    DOUBLING = "doubling"


# ========================================================= #
