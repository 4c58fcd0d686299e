#pragma once

namespace kadlab {

// Expected bit gain of the closest contact in a bucket of k uniformly chosen
// contacts whose common prefix with the target has length l.
double bitgain_standard(int l, int k, double tail_tolerance = 1e-12);

// Same for a bucket holding one contact per floor(log2 k)-bit pattern class.
double bitgain_diverse(int l, int k, double tail_tolerance = 1e-12);

}  // namespace kadlab
