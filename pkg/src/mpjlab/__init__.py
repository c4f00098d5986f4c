"""mpjlab: simulate, verify, and attack one-way pointer-jumping protocols."""

from .core import (
    BitVector,
    BudgetExceededError,
    DerivedViews,
    Instance,
    LayerFunction,
    MpjHatInstance,
    MpjInstance,
    Variant,
    derive_views,
    embed_three,
    enumerate_instances,
    eval_instance,
    eval_mpj,
    eval_mpj_hat,
    instance_count,
    instance_from_dict,
    instance_to_dict,
    sample_instance,
    sample_instances,
)
from .covers import (
    CoverSet,
    FiberPartition,
    build_d_cover,
    build_fiber_partition,
    build_sd_cover,
    verify_d_cover,
    verify_sd_cover,
)
from .sim import (
    CostRow,
    Message,
    PlayerView,
    ProtocolContractError,
    ProtocolHandle,
    ProtocolInvariantError,
    Transcript,
    VerifyReport,
    ViewKind,
    cost_profile,
    cost_rows_to_csv,
    make_view,
    run,
    verify,
)
from .jump import (
    PermProtocol3,
    SjChain,
    build_sj_chain,
    check_perm_protocol3,
    choose_d,
    index_protocol,
    mpj3_sublinear,
    mpjk_sublinear,
    naive_perm_protocol,
)
from .bucketing import (
    BucketPlan,
    BucketingScheme,
    bucket_index,
    bucket_members,
    bucketing_protocol,
    bucketing_protocol_doubling,
    iterated_log,
    log_star,
)
from .adversary import (
    AdversaryState,
    BoundRefusedError,
    CrossingPair,
    CrossingSearchError,
    FoolingPair,
    FoolingReport,
    build_fooling_inputs,
    find_crossed_cell,
    find_crossing_pair,
    iab_sets,
    is_crossing,
    max_message_bits,
    verify_fooling,
)
from .families import (
    collapsing_family,
    constant_protocol,
    hashing_protocol,
    parity_protocol,
    truncating_protocol,
)
from .registry import BuiltProtocol, UnknownProtocolError, build_protocol

__version__ = "0.1.0"
