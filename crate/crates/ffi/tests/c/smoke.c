#include <math.h>
#include <stdio.h>
#include <string.h>

#include "afrelay.h"

#define CHECK(cond)                                                        \
    do {                                                                   \
        if (!(cond)) {                                                     \
            fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__, #cond, \
                    afr_last_error_message());                             \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    AfrConfig cfg;
    CHECK(afr_config_default(&cfg) == AFR_STATUS_OK);
    cfg.num_relays = 1;
    cfg.rho1 = 1.0;
    cfg.rho2 = 1.0;

    AfrModel *model = NULL;
    CHECK(afr_model_new(&cfg, &model) == AFR_STATUS_OK);

    double out = -1.0, ser = -1.0, mgf = -1.0;
    CHECK(afr_model_outage(model, &out) == AFR_STATUS_OK);
    CHECK(out > 0.0 && out < 1.0);
    CHECK(afr_model_ser(model, "bpsk", &ser) == AFR_STATUS_OK);
    CHECK(afr_model_mgf(model, 1.0, &mgf) == AFR_STATUS_OK);
    CHECK(mgf > 0.0 && mgf < 1.0);

    double keep = 7.0;
    CHECK(afr_model_cdf(model, -1.0, &keep) == AFR_STATUS_INVALID_INPUT);
    CHECK(keep == 7.0);
    CHECK(strlen(afr_last_error_message()) > 0);

    AfrMcResult mc;
    CHECK(afr_simulate(&cfg, 200000, 3, "bpsk", 1.0, &mc) == AFR_STATUS_OK);
    CHECK(fabs(mc.outage - out) < 5.0 * mc.outage_se);
    CHECK(fabs(mc.ser - ser) < 5.0 * mc.ser_se);

    afr_model_free(model);
    printf("%s %.17g %.17g %.17g\n", afr_version(), out, ser, mgf);
    return 0;
}
