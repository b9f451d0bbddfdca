"""Static description of the network's shape.

The kernel/stride/pool table is fixed. The channel widths can be narrowed
for desk-scale runs, which keeps the spatial shape chain intact:

    107 -conv1 7x7/2-> 51 -pool-> 25 -conv2 5x5/2-> 11 -pool-> 5
        -conv3 3x3/1-> 3
"""
import dataclasses
import enum

PATCH_SIZE = 107

FULL_WIDTHS = (96, 256, 512)

LEVELS = (1, 2, 3)

# Per level: kernel, stride, and whether LRN + 3x3/2 max-pooling follow.
_LAYER_TABLE = {
    1: (7, 2, True),
    2: (5, 2, True),
    3: (3, 1, False),
}


class Error(Exception):
    pass


class InvalidArchitectureError(Error):
    pass


class Variant(enum.Enum):
    # The proposed aggregation: ESK selection across the attribute branches.
    AGG_ESK = 'agg-esk'
    # Ablation: plain element-wise combination of the branch outputs.
    SUM = 'sum'

    def __str__(self):
        return str(self.value)


class SumReduction(enum.Enum):
    MEAN = 'mean'
    ADD = 'add'

    def __str__(self):
        return str(self.value)


@dataclasses.dataclass(frozen=True)
class ConvLayerSpec:
    kernel: int
    stride: int
    in_channels: int
    out_channels: int
    pooled: bool
    normalized: bool

    def __post_init__(self):
        if self.kernel not in (7, 5, 3):
            raise InvalidArchitectureError(
                f'Unsupported kernel size {self.kernel}.')
        if self.stride < 1 or self.out_channels < 1 or self.in_channels < 1:
            raise InvalidArchitectureError(
                'Stride and channel counts must be positive.')


@dataclasses.dataclass(frozen=True)
class NetworkSpec:
    widths: tuple = FULL_WIDTHS
    fc_width: int = 512
    # ESK channel-attention reduction ratio and minimum reduced width.
    esk_reduction: int = 16
    esk_min_width: int = 4
    esk_spatial_kernel: int = 7
    dropout: float = 0.5
    lrn_size: int = 2
    variant: Variant = Variant.AGG_ESK
    sum_reduction: SumReduction = SumReduction.MEAN

    def __post_init__(self):
        if len(self.widths) != 3 or any(w < 1 for w in self.widths):
            raise InvalidArchitectureError(
                f'Expected three positive channel widths, got {self.widths}.')
        if self.fc_width < 1:
            raise InvalidArchitectureError('fc_width must be positive.')
        if self.esk_spatial_kernel < 1 or self.esk_spatial_kernel % 2 == 0:
            raise InvalidArchitectureError(
                'esk_spatial_kernel must be a positive odd number.')
        if not 0.0 <= self.dropout < 1.0:
            raise InvalidArchitectureError('dropout must lie in [0, 1).')

    def layer(self, level):
        """Returns the ConvLayerSpec of backbone level 1, 2 or 3."""
        if level not in LEVELS:
            raise InvalidArchitectureError(f'No backbone level {level}.')
        in_channels = 3 if level == 1 else self.widths[level - 2]
        kernel, stride, reduced = _LAYER_TABLE[level]
        return ConvLayerSpec(kernel=kernel,
                             stride=stride,
                             in_channels=in_channels,
                             out_channels=self.widths[level - 1],
                             pooled=reduced,
                             normalized=reduced)

    def spatial_kernel(self, level):
        """ESK spatial kernel at `level`, shrunk so every tap can reach the map.

        The fusion modules of a level operate on the pre-pool convolution
        output, which is only 3x3 on level 3.
        """
        size = fusion_map_size(level)
        return max(1, min(self.esk_spatial_kernel, 2 * size - 1))

    @property
    def output_size(self):
        """Spatial size of the conv3 output for a PATCH_SIZE input."""
        return conv3_output_size()

    @property
    def feature_dim(self):
        """Length of the concatenated RGB + TIR conv3 feature vector."""
        return 2 * self.widths[2] * self.output_size**2

    def as_dict(self):
        return {
            'widths': ','.join(str(w) for w in self.widths),
            'fc_width': self.fc_width,
            'esk_reduction': self.esk_reduction,
            'esk_min_width': self.esk_min_width,
            'esk_spatial_kernel': self.esk_spatial_kernel,
            'dropout': self.dropout,
            'lrn_size': self.lrn_size,
            'variant': str(self.variant),
            'sum_reduction': str(self.sum_reduction),
        }


def from_dict(data):
    """Inverse of NetworkSpec.as_dict()."""
    return NetworkSpec(
        widths=tuple(int(w) for w in str(data['widths']).split(',')),
        fc_width=int(data['fc_width']),
        esk_reduction=int(data['esk_reduction']),
        esk_min_width=int(data['esk_min_width']),
        esk_spatial_kernel=int(data['esk_spatial_kernel']),
        dropout=float(data['dropout']),
        lrn_size=int(data['lrn_size']),
        variant=Variant(data['variant']),
        sum_reduction=SumReduction(data['sum_reduction']),
    )


def conv_output_size(size, kernel, stride):
    return (size - kernel) // stride + 1


def fusion_map_size(level, size=PATCH_SIZE):
    """Spatial size of the convolution output (before pooling) at `level`."""
    for current in LEVELS:
        kernel, stride, pooled = _LAYER_TABLE[current]
        size = conv_output_size(size, kernel, stride)
        if current == level:
            return size
        if pooled:
            size = conv_output_size(size, 3, 2)
    raise InvalidArchitectureError(f'No backbone level {level}.')


def conv3_output_size(size=PATCH_SIZE):
    for level in LEVELS:
        kernel, stride, pooled = _LAYER_TABLE[level]
        size = conv_output_size(size, kernel, stride)
        if pooled:
            size = conv_output_size(size, 3, 2)
    return size
