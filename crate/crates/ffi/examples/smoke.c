#include <stdio.h>
#include "signalmarket.h"

int main(void) {
    SmParams *params = NULL;
    double g = 0.0;
    if (sm_params_default(&params) != SM_STATUS_OK) {
        fprintf(stderr, "%s\n", sm_last_error());
        return 1;
    }
    if (sm_access_posterior(params, 0.5, &g) != SM_STATUS_OK) {
        fprintf(stderr, "%s\n", sm_last_error());
        sm_params_free(params);
        return 1;
    }
    printf("signalmarket %s: g(0.5) = %.6f\n", sm_version(), g);
    sm_params_free(params);
    return 0;
}
