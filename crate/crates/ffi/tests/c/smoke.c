#include <math.h>
#include <stdio.h>
#include <string.h>

#include "membership_rd.h"

int main(void) {
    double rate = 0.0;
    if (mrd_optimal_binary(0.0, 0.5, &rate) != MRD_STATUS_OK || fabs(rate - 1.0) > 1e-12) {
        return 1;
    }
    if (mrd_optimal_binary(0.7, 0.5, &rate) != MRD_STATUS_TRIVIAL_REGIME) {
        return 2;
    }
    char msg[128];
    if (mrd_last_error_message(msg, sizeof msg) < 2) {
        return 3;
    }

    const char *names[] = {"alpha", "beta", "gamma", "delta"};
    const uint8_t *keys[4];
    size_t lens[4];
    for (int i = 0; i < 4; i++) {
        keys[i] = (const uint8_t *)names[i];
        lens[i] = strlen(names[i]);
    }
    MrdFilter *filter = NULL;
    MrdBuildReport report;
    if (mrd_filter_build(keys, lens, 4, 0.0, 0.5, 1, &filter, &report) != MRD_STATUS_OK || !report.success) {
        return 4;
    }
    for (int i = 0; i < 4; i++) {
        uint8_t accept = 0;
        if (mrd_filter_query(filter, keys[i], lens[i], &accept) != MRD_STATUS_OK || accept != 1) {
            return 5;
        }
    }
    mrd_filter_free(filter);
    printf("ok\n");
    return 0;
}
