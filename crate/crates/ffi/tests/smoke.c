#include <stdio.h>
#include "superlase.h"

static int check(SlStatus st, const char *what) {
    if (st != SL_STATUS_OK) {
        fprintf(stderr, "%s: %s (%s)\n", what, sl_status_name(st), sl_last_error_message());
        return 1;
    }
    return 0;
}

int main(void) {
    SlParams *p = NULL;
    double lc = 0, th = 0, power = 0, x = 0;
    SlGainBreakdown g;
    SlSteadyState s;

    if (check(sl_params_paper(&p), "params")) return 1;
    if (check(sl_critical_coupling(p, &lc), "critical")) return 1;
    if (check(sl_threshold_coupling(p, &th), "threshold")) return 1;
    if (check(sl_pump_power(p, th, &power), "power")) return 1;
    if (check(sl_mechanical_gain(p, th, &g), "gain")) return 1;
    if (check(sl_steady_state(p, 2.0 * lc, &s), "steady")) return 1;
    printf("lambda_c=%.17g\nlambda_th=%.17g\np_th=%.17g\ngain=%.17g\nphase=%d\n",
           lc, th, power, g.gain, (int)s.phase);

    /* Failure path: null handle. */
    if (sl_critical_coupling(NULL, &x) != SL_STATUS_NULL_POINTER) return 2;
    printf("error=%s\n", sl_last_error_message());
    sl_params_free(p);
    return 0;
}
