from probekit.errors import OutOfRange

INITIAL_TTL_CLASSES = (32, 64, 128, 255)


def infer_initial_ttl(reply_ip_ttl, hop_distance):
    """Smallest common initial TTL that explains a reply seen ``hop_distance`` hops away.

    The reply crossed ``hop_distance - 1`` routers on its way back, so the
    sender's initial TTL is at least ``reply_ip_ttl + hop_distance - 1``.
    """
    if not 0 <= reply_ip_ttl <= 255:
        raise OutOfRange(f"reply TTL {reply_ip_ttl} outside 0..255")
    if hop_distance < 1:
        raise OutOfRange(f"hop distance must be >= 1, got {hop_distance}")
    corrected = reply_ip_ttl + hop_distance - 1
    for c in INITIAL_TTL_CLASSES:
        if c >= corrected:
            return c
    raise OutOfRange(f"corrected TTL {corrected} exceeds 255")
