#ifndef TTUNE_G2_H
#define TTUNE_G2_H

/* B = alpha * transpose(A) + beta * B
 * problem: perm=2,1;size=17,19;lda=17,19;ldb=19,17;kinds=dd;beta=z
 * plan: order=2,1;bA=8;bB=4;d=5;ss=1;w=4
 */
#ifdef __cplusplus
extern "C" {
#endif

void transpose_21_17x19_dd(const double* A, double* B, double alpha, double beta);

#ifdef __cplusplus
}
#endif

#endif
