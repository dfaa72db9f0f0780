#include <math.h>
#include <omp.h>

static const int NUM_THREADS = 4;

void poisson_2d_fused(double *Y, double *X, double weight1, double lambda1, double *rhs,
        double a_h1, double *retval1) {
    double retval = *(retval1);
    omp_set_dynamic(0);
    #pragma omp parallel num_threads(4) reduction(max : retval)
    {
        int tid1 = omp_get_thread_num();
        for (int i1 = tid1; i1 <= 4095; i1 += 4) {
            double s1, s2, s3;
            int a1, b1;
            b1 = ((66*(i1 / 64)) + (i1 % 64));
            a1 = (b1 + 67);
            s1 = X[a1];
            s2 = ((((X[(b1 + 1)] + X[(b1 + 66)]) - (4.0*s1)) + X[(b1 + 68)]) + X[(b1 + 133)]);
            s3 = rhs[i1];
            Y[a1] = ((s1 + (weight1*s2)) - (lambda1*s3));
            retval = ((retval >= fabs((((1.0/(a_h1*a_h1))*s2) - s3))) ? retval : fabs((((1.0/(a_h1*a_h1))*s2) - s3)));
        }
    }
    *(retval1) = retval;
}
